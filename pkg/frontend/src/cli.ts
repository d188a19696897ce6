/**
 * usage: node dist/cli.js <kind> --input <file> [--input <file>] --out <fig.svg>
 *                         [--alpha <a>] [--d <d>]
 *
 * kinds: endpoint-density | mass-vs-N | gap-scaling | scenario-scan
 */

import { render, type FigureKind, type FigureSpec } from "./figures.js";

const KINDS: FigureKind[] = ["endpoint-density", "mass-vs-N", "gap-scaling", "scenario-scan"];

export function parseArgs(argv: string[]): FigureSpec {
  const [kind, ...rest] = argv;
  if (!KINDS.includes(kind as FigureKind)) {
    throw new Error(`first argument must be one of ${KINDS.join(", ")}; got '${kind ?? ""}'`);
  }
  const spec: FigureSpec = { kind: kind as FigureKind, inputs: [], out: "" };
  for (let i = 0; i < rest.length; i += 2) {
    const flag = rest[i];
    const value = rest[i + 1];
    if (value === undefined) {
      throw new Error(`flag ${flag} needs a value`);
    }
    switch (flag) {
      case "--input":
        spec.inputs.push(value);
        break;
      case "--out":
        spec.out = value;
        break;
      case "--alpha":
        spec.alpha = Number(value);
        break;
      case "--d":
        spec.d = Number(value);
        break;
      default:
        throw new Error(`unknown flag ${flag}`);
    }
  }
  if (spec.inputs.length === 0) {
    throw new Error("at least one --input is required");
  }
  if (!spec.out.endsWith(".svg")) {
    throw new Error("--out must name an .svg file");
  }
  return spec;
}

export function main(argv: string[]): number {
  try {
    const result = render(parseArgs(argv));
    console.log(`wrote ${result.svgPath}, ${result.sidecarPath}, ${result.manifestPath}`);
    return 0;
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 1;
  }
}

if (import.meta.url === `file://${process.argv[1]}`) {
  process.exit(main(process.argv.slice(2)));
}
