#!/usr/bin/env node
// ttflow-figures render <run-dir> --fig <kind> --out <path>
import yargs from "yargs";
import { hideBin } from "yargs/helpers";
import { FIGURE_KINDS, FigureKind } from "./figures.js";
import { render } from "./render.js";

export async function main(argv: string[]): Promise<number> {
  let failed = false;
  await yargs(argv)
    .scriptName("ttflow-figures")
    .command(
      "render <run-dir>",
      "draw a figure from a solver run directory",
      (y) =>
        y
          .positional("run-dir", { type: "string", demandOption: true })
          .option("fig", {
            choices: FIGURE_KINDS,
            demandOption: true,
            describe: "which figure to draw",
          })
          .option("out", {
            type: "string",
            demandOption: true,
            describe: "output SVG path",
          })
          .option("times", {
            type: "number",
            array: true,
            describe: "snapshot times for the 2D grid (defaults to 5 evenly spaced)",
          }),
      (args) => {
        try {
          render({
            kind: args.fig as FigureKind,
            runDir: args["run-dir"] as string,
            times: args.times,
            outPath: args.out,
          });
          process.stderr.write(`wrote ${args.out}\n`);
        } catch (err) {
          failed = true;
          process.stderr.write(`error: ${err instanceof Error ? err.message : String(err)}\n`);
        }
      },
    )
    .demandCommand(1)
    .strict()
    .help()
    .fail((msg, err) => {
      failed = true;
      process.stderr.write(`error: ${msg ?? err?.message}\n`);
    })
    .parseAsync();
  return failed ? 1 : 0;
}

const entry = process.argv[1];
if (entry && (entry.endsWith("cli.js") || entry.endsWith("ttflow-figures"))) {
  main(hideBin(process.argv)).then((code) => {
    process.exitCode = code;
  });
}
