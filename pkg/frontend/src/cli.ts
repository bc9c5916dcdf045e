#!/usr/bin/env node
/**
 * dfel-extract CLI.
 *
 *   extract --root DIR --backbones vgg16,vgg19,... --out FILE
 *             [--batch-size N] [--weights seeded|remote]
 *             [--model-base-url URL] [--saturation-filter]
 *
 * Exit codes: 0 success, 1 job failure (single-line error), 2 usage.
 */

import { extractFeatures } from "./extract";
import { JobError } from "./images";

interface Flags {
  [key: string]: string | boolean;
}

function parseFlags(argv: string[]): Flags {
  const flags: Flags = {};
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    if (!arg.startsWith("--")) {
      throw new UsageError(`unexpected argument: ${arg}`);
    }
    const name = arg.slice(2);
    if (name === "saturation-filter") {
      flags[name] = true;
    } else {
      const value = argv[i + 1];
      if (value === undefined || value.startsWith("--")) {
        throw new UsageError(`flag --${name} needs a value`);
      }
      flags[name] = value;
      i++;
    }
  }
  return flags;
}

class UsageError extends Error {}

const USAGE =
  "usage: dfel-extract extract --root DIR --backbones a,b,... --out FILE " +
  "[--batch-size N] [--weights seeded|remote] [--model-base-url URL] " +
  "[--saturation-filter]";

export async function cliDispatch(argv: string[]): Promise<number> {
  try {
    if (argv[0] !== "extract") {
      throw new UsageError(`unknown subcommand: ${argv[0] ?? "(none)"}`);
    }
    const flags = parseFlags(argv.slice(1));
    for (const required of ["root", "backbones", "out"]) {
      if (!(required in flags)) {
        throw new UsageError(`missing required flag --${required}`);
      }
    }
    const weights = (flags["weights"] as string) ?? "seeded";
    if (weights !== "seeded" && weights !== "remote") {
      throw new UsageError(`--weights must be seeded or remote, got ${weights}`);
    }
    const summary = await extractFeatures({
      imageRoot: flags["root"] as string,
      backbones: (flags["backbones"] as string).split(","),
      outputPath: flags["out"] as string,
      batchSize: flags["batch-size"] ? Number(flags["batch-size"]) : undefined,
      weightSource: weights,
      modelBaseUrl: flags["model-base-url"] as string | undefined,
      applySaturationFilter: Boolean(flags["saturation-filter"]),
    });
    console.log(
      `wrote ${summary.nImages} x ${summary.nDims} features to ${flags["out"]} ` +
        `(classes: ${summary.classNames.join(",")}; skipped ${summary.nSkipped}, ` +
        `filtered ${summary.nFiltered})`,
    );
    return 0;
  } catch (err) {
    if (err instanceof UsageError) {
      console.error(`error: usage-error: ${err.message}`);
      console.error(USAGE);
      return 2;
    }
    if (err instanceof JobError) {
      console.error(`error: job-error: ${err.message}`);
      return 1;
    }
    console.error(`error: io-error: ${err}`);
    return 1;
  }
}

if (require.main === module) {
  cliDispatch(process.argv.slice(2)).then((code) => {
    process.exitCode = code;
  });
}
