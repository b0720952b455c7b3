#!/usr/bin/env node
import yargs from 'yargs';
import { hideBin } from 'yargs/helpers';

import { DEFAULTS, exportCollections, readTsv } from './export.js';
import { Dtype } from './format.js';
import { Style } from './encoder.js';

export async function main(argv: string[]): Promise<number> {
  const args = await yargs(argv)
    .command('export', 'encode TSV collections into the binary embedding format', (y) =>
      y
        .option('checkpoint', { type: 'string', demandOption: true })
        .option('docs', { type: 'string', demandOption: true })
        .option('queries', { type: 'string', demandOption: true })
        .option('out', { type: 'string', demandOption: true })
        .option('style', { choices: ['colbert', 'coil'] as const, demandOption: true })
        .option('max-query-len', { type: 'number', default: DEFAULTS.maxQueryLen })
        .option('max-doc-len', { type: 'number', default: DEFAULTS.maxDocLen })
        .option('dtype', { choices: ['f16', 'f32'] as const, default: DEFAULTS.dtype }),
    )
    .demandCommand(1)
    .strict()
    .parse();

  const result = exportCollections(
    {
      checkpoint: args.checkpoint as string,
      style: args.style as Style,
      maxQueryLen: args['max-query-len'] as number,
      maxDocLen: args['max-doc-len'] as number,
      dtype: args.dtype as Dtype,
    },
    readTsv(args.docs as string),
    readTsv(args.queries as string),
    args.out as string,
  );
  console.log(
    `exported ${result.docCount} documents, ${result.queryCount} queries, ` +
      `vocabulary ${result.vocabSize} (skipped ${result.skipped.length})`,
  );
  return 0;
}

const invokedDirectly =
  process.argv[1] && import.meta.url.endsWith(process.argv[1].split('/').pop()!);
if (invokedDirectly) {
  main(hideBin(process.argv))
    .then((code) => process.exit(code))
    .catch((err) => {
      console.error(String(err.message ?? err));
      process.exit(1);
    });
}
