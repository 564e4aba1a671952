/** Command line: render one SVG figure per spec file given as an argument. */

import { pathToFileURL } from "url";

import { loadSpec, renderSpec } from "./spec.js";

export function main(argv: string[]): number {
  if (argv.length === 0) {
    console.error("usage: lineagelab-figures <spec.json> [<spec.json> ...]");
    return 2;
  }
  try {
    for (const path of argv) {
      const written = renderSpec(loadSpec(path));
      console.log(written);
    }
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 1;
  }
  return 0;
}

if (process.argv[1] && import.meta.url === pathToFileURL(process.argv[1]).href) {
  process.exit(main(process.argv.slice(2)));
}
