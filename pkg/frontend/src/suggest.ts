/** Template autocomplete for the instruction box.
 *
 * Matching is case-insensitive over the raw patterns (holes like {element}
 * stay visible so users see where cues go). Prefix matches outrank substring
 * matches; within each class the corpus order is preserved.
 */

export function suggestTemplates(patterns: string[], input: string, limit = 8): string[] {
  const needle = input.trim().toLowerCase();
  if (needle.length === 0) {
    return [];
  }
  const seen = new Set<string>();
  const prefix: string[] = [];
  const inner: string[] = [];
  for (const pattern of patterns) {
    if (seen.has(pattern)) {
      continue;
    }
    seen.add(pattern);
    const hay = pattern.toLowerCase();
    if (hay.startsWith(needle)) {
      prefix.push(pattern);
      if (prefix.length >= limit) {
        break;
      }
    } else if (hay.includes(needle)) {
      inner.push(pattern);
    }
  }
  return [...prefix, ...inner].slice(0, limit);
}
