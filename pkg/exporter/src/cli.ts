#!/usr/bin/env node
/**
 * drgrade-export: run an image classifier over a folder and write the
 * drgrade predictions CSV.
 *
 *   drgrade-export export --images DIR --model NAME --classes K --out FILE [--labels FILE]
 *
 * Model names: "builtin:<tag>" for the seeded reference classifier, or a
 * path to a linear-pool8 JSON weights file. Exit codes: 0 success,
 * 1 usage error, 2 data error (unreadable inputs, bad model).
 */

import yargs from "yargs";
import { hideBin } from "yargs/helpers";
import { ExportError, runExport } from "./exporter";
import { ModelLoadFailure } from "./models";

export function main(argv: string[]): number {
  let failed = false;
  const parser = yargs(argv)
    .scriptName("drgrade-export")
    .command("export", "export classifier probabilities for a folder of images", (y) =>
      y
        .option("images", { type: "string", demandOption: true, describe: "image folder" })
        .option("model", { type: "string", demandOption: true, describe: "builtin:<tag> or weights JSON path" })
        .option("classes", { type: "number", demandOption: true, describe: "number of classes K" })
        .option("out", { type: "string", demandOption: true, describe: "output predictions CSV" })
        .option("labels", { type: "string", describe: "optional sample_id,label CSV to join true_label" })
    )
    .demandCommand(1)
    .strict()
    .exitProcess(false)
    .fail((msg, err) => {
      failed = true;
      process.stderr.write(`error: ${msg ?? err?.message}\n`);
    });

  const args = parser.parseSync();
  if (failed) return 1;

  try {
    const result = runExport({
      imagesDir: args.images as string,
      model: args.model as string,
      classes: args.classes as number,
      out: args.out as string,
      labels: args.labels as string | undefined,
    });
    process.stdout.write(
      `wrote ${args.out}: ${result.rowsWritten} rows` +
        (result.skipped.length ? `, ${result.skipped.length} skipped (${result.sidecarLog})` : "") +
        "\n"
    );
    return 0;
  } catch (e) {
    if (e instanceof ExportError || e instanceof ModelLoadFailure) {
      process.stderr.write(`error: ${e.message}\n`);
      return 2;
    }
    throw e;
  }
}

if (require.main === module) {
  process.exit(main(hideBin(process.argv)));
}
