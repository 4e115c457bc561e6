"""
The `ba-forge` command.

    ba-forge gen-data --out data/ --seed 0
    ba-forge train --data data/ --arch cnn-a --out cnn-a.baf
    ba-forge attack --config a4.json --source s.ppm --target t.ppm --model cnn-a.baf --mask eyeglass.ppm --out ax.ppm
    ba-forge evaluate --data data/ --surrogate cnn-a.baf --target cnn-b.baf --out report.json
    ba-forge profile --model cnn-a.baf --image ax.ppm --reference t.ppm --kind nonlinear --out profile.csv

Exit codes: 0 success, 1 invalid input or usage, 2 file errors, 3 numeric
failure.

:copyright: 2026 The ba-forge Authors
:license: Apache 2.0
"""
import argparse
import logging
import os
import sys

import pandas as pd

from . import defaults
from .attack import AttackConfig, run_attack
from .defenses import parse_defense
from .errors import BAForgeError, NumericFailure
from .evaluation import eval_matrix, loss_variation_profile, report_config
from .extractor import ARCHITECTURES
from .formats import (read_ppm, write_ppm, read_json, save_extractor, load_extractor,
                      export_dataset, import_dataset)
from .manifest import RunManifest, manifest_path
from .masks import load_mask
from .synthetic import DatasetSpec, generate_dataset
from .training import train_extractor, calibrate_threshold, accuracy
from .transforms import KINDS, BrightnessParams

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_IO = 2
EXIT_NUMERIC = 3


class UsageError(BAForgeError):
    """
    The command line does not make sense.
    """
    pass


class Parser(argparse.ArgumentParser):
    """
    An argument parser that raises instead of exiting.
    """
    def error(self, message):
        raise UsageError('{}: {}'.format(self.prog, message))


def _stem(path):
    return os.path.splitext(os.path.basename(path))[0]


def _makedirs_for(path):
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)


###############################################
# Commands
###############################################

def cmd_gen_data(args):
    spec = DatasetSpec.from_json(args.spec) if args.spec else DatasetSpec()
    manifest = RunManifest('gen-data', spec.to_dict(), args.seed,
                           inputs={'spec': args.spec}, outputs={'dataset': args.out})

    dataset = generate_dataset(spec, seed=args.seed)
    table = export_dataset(dataset, args.out)
    manifest.write(args.out)
    print("Wrote {} images of {} identities to {}".format(len(table), dataset.n_identities, args.out))
    return EXIT_OK


def cmd_train(args):
    if not os.path.isdir(args.data):
        raise FileNotFoundError("No dataset directory at {}.".format(args.data))
    config = {'arch': args.arch, 'epochs': args.epochs, 'lr': args.lr,
              'holdout': args.holdout, 'batch_size': args.batch_size}
    manifest = RunManifest('train', config, args.seed,
                           inputs={'data': args.data}, outputs={'weights': args.out})

    train, test = import_dataset(args.data).split(args.holdout)
    extractor = train_extractor(train, arch=args.arch, epochs=args.epochs, lr=args.lr,
                                seed=args.seed, batch_size=args.batch_size,
                                verbose=not args.quiet)
    _makedirs_for(args.out)
    save_extractor(extractor, args.out)
    manifest.write(manifest_path(args.out))

    if len(test):
        print("Held-out accuracy: {:.4f}".format(accuracy(extractor, train, test)))
    print("Wrote {}".format(args.out))
    return EXIT_OK


def cmd_attack(args):
    config = AttackConfig.from_json(args.config)
    if args.seed is not None:
        config = config.replace(seed=args.seed)
    if not config.is_imperceptible and not args.mask:
        raise UsageError("Mode {} needs a patch mask: pass --mask.".format(config.mode))

    extractor = load_extractor(args.model)
    source = read_ppm(args.source)
    target = read_ppm(args.target) if args.target else None
    mask = load_mask(args.mask, shape=source.shape) if args.mask and not config.is_imperceptible else None

    trace_path = os.path.splitext(args.out)[0] + '.trace.csv'
    manifest = RunManifest('attack', config.to_dict(), config.seed,
                           inputs={'config': args.config, 'source': args.source, 'target': args.target,
                                   'model': args.model, 'mask': args.mask},
                           outputs={'adversarial': args.out, 'trace': trace_path})

    result = run_attack(source, target, extractor, config, patch_mask=mask)
    _makedirs_for(args.out)
    write_ppm(args.out, result.adversarial)
    result.trace.to_csv(trace_path, index=False)
    manifest.write(manifest_path(args.out))
    print("Loss {:.4f} -> {:.4f}. Wrote {}".format(result.initial_loss, result.final_loss, args.out))
    return EXIT_OK


def cmd_evaluate(args):
    config = report_config(read_json(args.config) if args.config else None)
    if args.n_instances is not None:
        config['n_instances'] = args.n_instances
    if args.n_trials is not None:
        config['n_trials'] = args.n_trials
    defenses = [parse_defense(d) for d in args.defense or []]

    surrogate_name = _stem(args.surrogate)
    models = {surrogate_name: load_extractor(args.surrogate)}
    for path in args.target or []:
        if os.path.abspath(path) != os.path.abspath(args.surrogate):
            models[_stem(path)] = load_extractor(path)

    _, test = import_dataset(args.data).split(args.holdout)
    thresholds = {name: calibrate_threshold(model, test, target_far=args.target_far, seed=args.seed)
                  for name, model in models.items()}

    csv_path = os.path.splitext(args.out)[0] + '.csv'
    manifest = RunManifest('evaluate', dict(config, defenses=args.defense or [], target_far=args.target_far),
                           args.seed,
                           inputs={'data': args.data, 'surrogate': args.surrogate, 'targets': args.target or []},
                           outputs={'report': args.out, 'csv': csv_path})

    report = eval_matrix(config['variants'], config['modes'], config['objectives'],
                         models[surrogate_name], models, test, thresholds,
                         n_instances=config['n_instances'], seed=args.seed,
                         n_trials=config['n_trials'], attack_overrides=config['attack'],
                         defenses=defenses, surrogate_name=surrogate_name,
                         verbose=not args.quiet)
    report.metadata['threshold_details'] = {n: t.to_dict() for n, t in thresholds.items()}

    _makedirs_for(args.out)
    report.to_json(args.out)
    report.to_csv(csv_path)
    manifest.write(manifest_path(args.out))
    print(report.table().to_string())
    return EXIT_OK


def cmd_profile(args):
    extractor = load_extractor(args.model)
    image = read_ppm(args.image)
    reference = read_ppm(args.reference) if args.reference else image
    mask = load_mask(args.mask, shape=image.shape) if args.mask else None
    kinds = args.kind or list(KINDS)

    manifest = RunManifest('profile', {'kinds': kinds, 'n': args.n, 'objective': args.objective},
                           args.seed,
                           inputs={'model': args.model, 'image': args.image,
                                   'reference': args.reference, 'mask': args.mask},
                           outputs={'profile': args.out, 'plot': args.plot})

    params = BrightnessParams.evaluation()
    profiles = [loss_variation_profile(extractor, image, extractor.forward(reference), kind,
                                       n_samples=args.n, params=params, patch_mask=mask,
                                       objective=args.objective, seed=args.seed)
                for kind in kinds]

    samples = pd.concat([pd.DataFrame({'kind': p.kind, 'sample': range(p.n_samples), 'loss': p.losses})
                         for p in profiles], ignore_index=True)
    summary = pd.DataFrame([p.summary() for p in profiles])
    _makedirs_for(args.out)
    samples.to_csv(args.out, index=False)
    summary.to_csv(os.path.splitext(args.out)[0] + '.summary.csv', index=False)

    if args.plot:
        from .plot import plot_loss_variation
        plot_loss_variation(profiles).savefig(args.plot)

    manifest.write(manifest_path(args.out))
    print(summary.to_string(index=False))
    return EXIT_OK


###############################################
# Parser
###############################################

def build_parser():
    parser = Parser(prog='ba-forge', description='Brightness-agnostic adversarial examples on toy face verifiers.')
    level = parser.add_mutually_exclusive_group()
    level.add_argument('-v', '--verbose', action='store_true', help='Log debug messages.')
    level.add_argument('-q', '--quiet', action='store_true', help='Only log warnings; no progress bars.')
    sub = parser.add_subparsers(dest='command', parser_class=Parser)
    sub.required = True

    p = sub.add_parser('gen-data', help='Generate the synthetic identity dataset.')
    p.add_argument('--spec', help='Dataset spec JSON file. Defaults if omitted.')
    p.add_argument('--out', required=True, help='Output directory.')
    p.add_argument('--seed', type=int, default=0)
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser('train', help='Train a feature extractor.')
    p.add_argument('--data', required=True, help='Dataset directory.')
    p.add_argument('--arch', default='cnn-a', choices=sorted(ARCHITECTURES))
    p.add_argument('--out', required=True, help='Weights file to write.')
    p.add_argument('--epochs', type=int, default=defaults.TRAINING['epochs'])
    p.add_argument('--lr', type=float, default=defaults.TRAINING['lr'])
    p.add_argument('--batch-size', type=int, default=defaults.TRAINING['batch_size'])
    p.add_argument('--holdout', type=float, default=defaults.TRAINING['holdout'])
    p.add_argument('--seed', type=int, default=0)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser('attack', help='Generate one adversarial example.')
    p.add_argument('--config', required=True, help='Attack config JSON file.')
    p.add_argument('--source', required=True, help="Attacker's image (PPM).")
    p.add_argument('--target', help='Image to impersonate (PPM). Not needed for dodging.')
    p.add_argument('--model', required=True, help='Weights of the attacked model.')
    p.add_argument('--mask', help='Patch mask image (PPM). Required in patch modes.')
    p.add_argument('--out', required=True, help='Adversarial image to write (PPM).')
    p.add_argument('--seed', type=int, help='Overrides the seed in the config.')
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser('evaluate', help='Run and score an attack matrix.')
    p.add_argument('--config', help='Report config JSON file. Defaults if omitted.')
    p.add_argument('--data', required=True, help='Dataset directory; pairs come from its held-out part.')
    p.add_argument('--surrogate', required=True, help='Weights of the attacked model.')
    p.add_argument('--target', action='append', help='Weights of a black-box model. Repeatable.')
    p.add_argument('--n-instances', type=int)
    p.add_argument('--n-trials', type=int)
    p.add_argument('--defense', action='append',
                   help='Pre-processing such as median_blur:3 or bit_squeeze:4. Repeatable, applied in order.')
    p.add_argument('--target-far', type=float, default=defaults.CALIBRATION['target_far'])
    p.add_argument('--holdout', type=float, default=defaults.TRAINING['holdout'])
    p.add_argument('--seed', type=int, default=0)
    p.add_argument('--out', required=True, help='Report JSON to write; a CSV goes alongside.')
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser('profile', help='Measure adversarial loss variation under brightness transforms.')
    p.add_argument('--model', required=True)
    p.add_argument('--image', required=True, help='Image to transform (PPM).')
    p.add_argument('--reference', help='Reference image (PPM). The image itself if omitted.')
    p.add_argument('--kind', action='append', choices=KINDS, help='Transform kind. Repeatable; all if omitted.')
    p.add_argument('--n', type=int, default=200, help='Samples per kind.')
    p.add_argument('--objective', default='impersonation', choices=defaults.OBJECTIVES)
    p.add_argument('--mask', help='Patch mask, to use the patch form of the non-linear transform.')
    p.add_argument('--seed', type=int, default=0)
    p.add_argument('--out', required=True, help='CSV of per-sample losses; a summary CSV goes alongside.')
    p.add_argument('--plot', help='Also save a figure of the loss distributions here.')
    p.set_defaults(func=cmd_profile)

    return parser


def main(argv=None):
    """
    Run the command line. Returns the exit code.
    """
    try:
        args = build_parser().parse_args(argv)
    except UsageError as e:
        print(str(e), file=sys.stderr)
        return EXIT_INVALID

    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, format='%(levelname)s %(name)s: %(message)s')

    try:
        return args.func(args)
    except NumericFailure as e:
        logger.error("%s", e)
        return EXIT_NUMERIC
    except OSError as e:
        logger.error("%s", e)
        return EXIT_IO
    except (BAForgeError, ValueError) as e:
        logger.error("%s", e)
        return EXIT_INVALID


if __name__ == '__main__':
    sys.exit(main())
