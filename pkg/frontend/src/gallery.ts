/** Static HTML gallery over the PNG files in an output directory. */

import { readdirSync, writeFileSync } from "node:fs";
import { join } from "node:path";

export function writeGallery(outDir: string, title = "qgsphere plots"): string {
  const images = readdirSync(outDir)
    .filter((f) => f.endsWith(".png"))
    .sort();
  const items = images
    .map(
      (f) =>
        `    <figure><img src="${f}" alt="${f}" loading="lazy"><figcaption>${f}</figcaption></figure>`,
    )
    .join("\n");
  const html = `<!doctype html>
<html lang="en">
<head>
<meta charset="utf-8">
<title>${title}</title>
<style>
  body { font-family: system-ui, sans-serif; margin: 1.5rem; background: #fafafa; }
  main { display: grid; grid-template-columns: repeat(auto-fill, minmax(360px, 1fr)); gap: 1rem; }
  figure { margin: 0; background: white; border: 1px solid #ddd; padding: .5rem; }
  img { width: 100%; height: auto; image-rendering: pixelated; }
  figcaption { font-size: .85rem; color: #444; padding-top: .25rem; }
</style>
</head>
<body>
<h1>${title}</h1>
<main>
${items}
</main>
</body>
</html>
`;
  const path = join(outDir, "index.html");
  writeFileSync(path, html);
  return path;
}
