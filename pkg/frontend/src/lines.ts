// Display-only segmentation. Verdicts, counts, and excess positions all
// come from the server's ValidationReport; this merely cuts the poem into
// renderable lines the same way the report's per_line entries are ordered.

const DELIMS = /([，。、；？！\n]+)/;

export type DisplayLine = {
  text: string;
  punct: string;
};

export function displayLines(poem: string): DisplayLine[] {
  const parts = poem.split(DELIMS);
  const lines: DisplayLine[] = [];
  for (let i = 0; i < parts.length; i += 2) {
    const text = parts[i];
    const punct = (parts[i + 1] ?? "").replace(/\n/g, "");
    if (text.length > 0) lines.push({ text, punct });
  }
  return lines;
}
