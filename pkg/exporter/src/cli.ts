#!/usr/bin/env node
/**
 * export_features: pooled multi-layer descriptors from a directory or list
 * of images, written as a UOFV1 feature file.
 *
 * Exit codes: 0 success, 1 usage error, 2 data error.
 */

import { parseArgs } from 'util';

import {
  BACKBONE_SPECS,
  Backbone,
  buildStubBackbone,
  loadGraphBackbone,
} from './backbone';
import { extract, listImages } from './extract';

const USAGE = `usage: export_features --backbone <resnet101|efficientnet_b4|stub>
                       --images <dir-or-list-file> --out <features.uof>
                       [--model-path <tfjs-model-dir>] [--taps name1,name2,...]
                       [--batch-size N] [--seed N]

Pretrained backbones need --model-path (a converted tfjs graph model) and
--taps naming one output per stage, shallow to deep. The stub backbone is a
small seeded network for pipeline checks and needs neither.`;

async function resolveBackbone(values: {
  backbone?: string;
  'model-path'?: string;
  taps?: string;
  seed?: string;
}): Promise<Backbone> {
  const name = values.backbone ?? '';
  if (name === 'stub') {
    return buildStubBackbone(values.seed !== undefined ? Number(values.seed) : 7);
  }
  const spec = BACKBONE_SPECS[name];
  if (!spec) {
    throw new UsageError(`unknown backbone ${JSON.stringify(name)}`);
  }
  if (!values['model-path'] || !values.taps) {
    throw new UsageError(`backbone ${name} needs --model-path and --taps`);
  }
  return loadGraphBackbone(values['model-path'], spec, values.taps.split(','));
}

class UsageError extends Error {}

export async function main(argv: string[]): Promise<number> {
  let values;
  try {
    ({ values } = parseArgs({
      args: argv,
      options: {
        backbone: { type: 'string' },
        images: { type: 'string' },
        out: { type: 'string' },
        'model-path': { type: 'string' },
        taps: { type: 'string' },
        'batch-size': { type: 'string', default: '16' },
        seed: { type: 'string' },
        help: { type: 'boolean', default: false },
      },
      allowPositionals: false,
    }));
  } catch (error) {
    process.stderr.write(`${error instanceof Error ? error.message : error}\n${USAGE}\n`);
    return 1;
  }
  if (values.help) {
    process.stdout.write(USAGE + '\n');
    return 0;
  }
  if (!values.backbone || !values.images || !values.out) {
    process.stderr.write(`--backbone, --images and --out are required\n${USAGE}\n`);
    return 1;
  }
  const batchSize = Number(values['batch-size']);
  if (!Number.isInteger(batchSize) || batchSize < 1) {
    process.stderr.write(`--batch-size must be a positive integer\n`);
    return 1;
  }

  let backbone: Backbone;
  try {
    backbone = await resolveBackbone(values);
  } catch (error) {
    if (error instanceof UsageError) {
      process.stderr.write(`${error.message}\n${USAGE}\n`);
      return 1;
    }
    process.stderr.write(`export_features: ${error instanceof Error ? error.message : error}\n`);
    return 2;
  }

  try {
    const images = listImages(values.images);
    const result = await extract({
      backbone,
      images,
      outPath: values.out,
      batchSize,
    });
    process.stdout.write(`${result.outPath}\n`);
    if (result.skippedManifestPath) {
      process.stderr.write(
        `skipped ${result.skipped.length} unreadable image(s); ` +
        `see ${result.skippedManifestPath}\n`,
      );
    }
    return 0;
  } catch (error) {
    process.stderr.write(`export_features: ${error instanceof Error ? error.message : error}\n`);
    return 2;
  } finally {
    backbone.dispose();
  }
}

if (require.main === module) {
  main(process.argv.slice(2)).then((code) => {
    process.exitCode = code;
  });
}
