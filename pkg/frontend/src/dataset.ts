/** Labeled source datasets: text CSV files and class-per-subfolder image trees. */

import * as fs from "node:fs";
import * as path from "node:path";

export interface SourceItem {
  /** raw class value from the source (remapped to dense ids at export time) */
  label: string;
  text?: string;
  imagePath?: string;
}

export interface SourceDataset {
  kind: "text-csv" | "image-folder";
  items: SourceItem[];
  /** sorted unique raw labels; index = dense class id */
  classes: string[];
}

/** Minimal RFC-4180-ish CSV row parser (quotes, escaped quotes, commas). */
export function parseCsvLine(line: string): string[] {
  const fields: string[] = [];
  let current = "";
  let quoted = false;
  for (let i = 0; i < line.length; i++) {
    const ch = line[i];
    if (quoted) {
      if (ch === '"') {
        if (line[i + 1] === '"') {
          current += '"';
          i++;
        } else {
          quoted = false;
        }
      } else {
        current += ch;
      }
    } else if (ch === '"') {
      quoted = true;
    } else if (ch === ",") {
      fields.push(current);
      current = "";
    } else {
      current += ch;
    }
  }
  fields.push(current);
  return fields;
}

/** CSV rows are `label,text...`; extra columns are joined into the text
 * (AG's News style "class,title,description" works as-is). */
export function loadTextCsv(csvPath: string): SourceDataset {
  const raw = fs.readFileSync(csvPath, "utf-8");
  const items: SourceItem[] = [];
  for (const [lineNo, line] of raw.split(/\r?\n/).entries()) {
    if (!line.trim()) continue;
    const fields = parseCsvLine(line);
    if (fields.length < 2) {
      throw new Error(`${csvPath}:${lineNo + 1}: expected at least label,text`);
    }
    items.push({ label: fields[0].trim(), text: fields.slice(1).join(" ").trim() });
  }
  if (items.length === 0) throw new Error(`${csvPath}: no rows`);
  return { kind: "text-csv", items, classes: denseClasses(items) };
}

/** Directory layout: <root>/<class-name>/<file>; labels are subfolder names. */
export function loadImageFolder(root: string): SourceDataset {
  const entries = fs.readdirSync(root, { withFileTypes: true })
    .filter((e) => e.isDirectory())
    .map((e) => e.name)
    .sort();
  if (entries.length === 0) throw new Error(`${root}: no class subfolders`);
  const items: SourceItem[] = [];
  for (const cls of entries) {
    const dir = path.join(root, cls);
    for (const file of fs.readdirSync(dir).sort()) {
      const full = path.join(dir, file);
      if (fs.statSync(full).isFile()) {
        items.push({ label: cls, imagePath: full });
      }
    }
  }
  if (items.length === 0) throw new Error(`${root}: no image files`);
  return { kind: "image-folder", items, classes: denseClasses(items) };
}

function denseClasses(items: SourceItem[]): string[] {
  return [...new Set(items.map((item) => item.label))].sort();
}
