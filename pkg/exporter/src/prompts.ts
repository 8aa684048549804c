/**
 * Prompt text generation.
 *
 * Class feature file (JSON): {"classes": [{"name": "tench",
 * "features": ["which has golden-green coloring", ...]}, ...]}
 * Feature strings carry their own "which is/has ..." lead-in.
 *
 * Styles:
 *   1  one prompt per class: "A photo of {class}."
 *   2  the fixed template list below, one prompt per template per class
 *   3  one prompt per (class, feature): "A photo of {class}, {feature}."
 */

export class PromptError extends Error {}

export interface ClassFeatures {
  name: string;
  features: string[];
}

export const STYLE2_TEMPLATES: readonly string[] = [
  'A photo of {}.',
  'A good photo of {}.',
  'An old picture of {}.',
  'A blurry photo of {}.',
  'A close-up photo of {}.',
  'A bright picture of {}.',
  'A cropped photo of {}.',
];

export function parseClassFeatureFile(raw: string): ClassFeatures[] {
  let parsed: unknown;
  try {
    parsed = JSON.parse(raw);
  } catch (e) {
    throw new PromptError(`class feature file is not valid JSON: ${(e as Error).message}`);
  }
  const classes = (parsed as { classes?: unknown }).classes;
  if (!Array.isArray(classes) || classes.length === 0) {
    throw new PromptError('class feature file needs a non-empty "classes" array');
  }
  return classes.map((entry, i) => {
    const { name, features } = entry as { name?: unknown; features?: unknown };
    if (typeof name !== 'string' || !name) {
      throw new PromptError(`class entry ${i} is missing a name`);
    }
    if (!Array.isArray(features) || features.some((f) => typeof f !== 'string')) {
      throw new PromptError(`class '${name}' needs a list of feature strings`);
    }
    return { name, features: features as string[] };
  });
}

function ensurePeriod(text: string): string {
  return text.endsWith('.') ? text : `${text}.`;
}

export function buildPrompts(classes: ClassFeatures[], style: 1 | 2 | 3): string[][] {
  switch (style) {
    case 1:
      return classes.map((c) => [`A photo of ${c.name}.`]);
    case 2:
      return classes.map((c) => STYLE2_TEMPLATES.map((t) => t.replace('{}', c.name)));
    case 3:
      return classes.map((c) => {
        if (c.features.length === 0) {
          throw new PromptError(`style 3 needs at least one feature for class '${c.name}'`);
        }
        return c.features.map((f) => ensurePeriod(`A photo of ${c.name}, ${f.trim()}`));
      });
    default:
      throw new PromptError(`unknown prompt style ${style}`);
  }
}
