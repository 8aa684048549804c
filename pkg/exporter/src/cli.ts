#!/usr/bin/env node
/**
 * cleanselect-export: bridge images and prompt text to the toolkit's
 * binary formats.
 *
 *   export-images  --dir images/ --ckpt stub:64 --out embeddings.emb1
 *                  [--manifest manifest.json]
 *   export-prompts --features features.json --style 3 --ckpt stub:64
 *                  --out-dir exported/
 */

import { parseArgs } from 'node:util';
import { readFileSync } from 'node:fs';

import { createEncoder } from './encoder.js';
import { exportImages, exportPrompts, updateManifestEmbeddings } from './export.js';
import { parseClassFeatureFile } from './prompts.js';

function usage(): string {
  return (
    'usage: cleanselect-export export-images --dir DIR --ckpt ID --out FILE [--manifest FILE]\n' +
    '       cleanselect-export export-prompts --features FILE --style {1,2,3} --ckpt ID --out-dir DIR\n'
  );
}

class UsageError extends Error {}

export function run(argv: string[]): number {
  const [command, ...rest] = argv;
  try {
    if (command === 'export-images') {
      const { values } = parseArgs({
        args: rest,
        options: {
          dir: { type: 'string' },
          ckpt: { type: 'string' },
          out: { type: 'string' },
          manifest: { type: 'string' },
        },
      });
      if (!values.dir || !values.ckpt || !values.out) throw new UsageError(usage());
      const encoder = createEncoder(values.ckpt);
      const result = exportImages(values.dir, encoder, values.out);
      if (values.manifest) updateManifestEmbeddings(values.manifest, values.out, result.dim);
      for (const w of result.warnings) console.error(`warning: skipped ${w}`);
      console.log(`wrote ${result.count}x${result.dim} embeddings to ${values.out}`);
      return result.warnings.length > 0 ? 3 : 0; // non-zero warning count is surfaced in the exit code
    }
    if (command === 'export-prompts') {
      const { values } = parseArgs({
        args: rest,
        options: {
          features: { type: 'string' },
          style: { type: 'string' },
          ckpt: { type: 'string' },
          'out-dir': { type: 'string' },
        },
      });
      const style = Number(values.style);
      if (!values.features || !values.ckpt || !values['out-dir'] || ![1, 2, 3].includes(style)) {
        throw new UsageError(usage());
      }
      const classes = parseClassFeatureFile(readFileSync(values.features, 'utf-8'));
      const encoder = createEncoder(values.ckpt);
      const result = exportPrompts(classes, style as 1 | 2 | 3, encoder, values['out-dir']);
      const total = result.prompts.reduce((acc, p) => acc + p.count, 0);
      console.log(`wrote ${total} prompts across ${result.prompts.length} classes to ${result.manifestPath}`);
      return 0;
    }
    if (command === '--help' || command === '-h') {
      console.log(usage());
      return 0;
    }
    console.error(usage());
    return 2;
  } catch (e) {
    if (e instanceof UsageError || (e as { code?: string }).code?.startsWith('ERR_PARSE_ARGS')) {
      console.error((e as Error).message);
      return 2;
    }
    console.error(`error: ${(e as Error).constructor.name}: ${(e as Error).message}`);
    return 1;
  }
}

if (import.meta.url === `file://${process.argv[1]}`) {
  process.exit(run(process.argv.slice(2)));
}
