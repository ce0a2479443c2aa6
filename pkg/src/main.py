import argparse
import json
import logging
import sys
from typing import List, Optional, Sequence

from config import TOOL_VERSION
from controllers.command_controller import EXIT_OK, CommandController
from models.enums import Command, EmbeddingKind, OutputFormat, SpaceKind
from models.run_config import RunConfig
from repositories.json_repository import SCHEMAS


def _floats(text: str) -> List[float]:
    try:
        return [float(item) for item in text.split(',') if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}")


def _ids(text: str) -> List[str]:
    return [item.strip() for item in text.split(',') if item.strip()]


def build_parser() -> argparse.ArgumentParser:
    """Command-line parser with one sub-command per module operation"""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--out', help='Write the report here (atomic replace)')
    common.add_argument('--format', choices=[f.value for f in OutputFormat], default='json')
    common.add_argument('--log-level', default='WARNING',
                        choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'])

    parser = argparse.ArgumentParser(
        prog='krlip',
        description='Kantorovich-Rubinstein norms, Hölder/Lipschitz analysis and '
                    'Besov/Hajłasz seminorms on finite metric spaces'
    )
    parser.add_argument('--version', action='version', version=f'%(prog)s {TOOL_VERSION}')
    parser.add_argument('--schema', action='store_true', help='Print the JSON schemas and exit')
    sub = parser.add_subparsers(dest='command')

    p = sub.add_parser('validate', parents=[common], help='Check the metric axioms')
    p.add_argument('--space', required=True)

    p = sub.add_parser('gen', parents=[common], help='Generate an example space')
    p.add_argument('--kind', choices=[k.value for k in SpaceKind], default='grid1d')
    p.add_argument('--n', type=int, required=True)
    p.add_argument('--seed', type=int, default=0)
    p.add_argument('--alpha', type=float)

    p = sub.add_parser('kr', parents=[common], help='KR norm of a measure')
    p.add_argument('action', nargs='?', choices=['norm', 'batch', 'certify'], default='norm')
    p.add_argument('--space', required=True)
    p.add_argument('--measure', required=True)
    p.add_argument('--field', help='Potential to certify')
    p.add_argument('--alpha', type=float, help='Snowflake the space first')
    p.add_argument('--balanced-only', action='store_true')
    p.add_argument('--jobs', type=int, default=1)

    p = sub.add_parser('lip', parents=[common], help='Hölder norms and little-Lip distance')
    p.add_argument('action', choices=['seminorm', 'norm', 'modulus', 'dist', 'operator', 'extend'])
    p.add_argument('--space', required=True)
    p.add_argument('--field', required=True)
    p.add_argument('--alpha', type=float, default=1.0)
    p.add_argument('--delta-schedule', type=_floats, default=[])
    p.add_argument('--subset', type=_ids, default=[], help='Point ids of A for extend')
    p.add_argument('--constant', type=float)
    p.add_argument('--depth', type=int, help='Use the net of this level as A')

    p = sub.add_parser('decompose', parents=[common], help='Atomic decomposition')
    p.add_argument('action', nargs='?', choices=['run', 'verify'], default='run')
    p.add_argument('--space', required=True)
    p.add_argument('--measure', required=True)
    p.add_argument('--alpha', type=float)
    p.add_argument('--decomposition', help='Decomposition (or decompose report) to verify')
    p.add_argument('--balanced', dest='balanced_only', action='store_true')

    p = sub.add_parser('besov', parents=[common], help='Besov seminorm, norm, Clarkson check')
    p.add_argument('action', choices=['seminorm', 'norm', 'clarkson'])
    p.add_argument('--space', required=True)
    p.add_argument('--field', required=True)
    p.add_argument('--field2', help='Second field for clarkson')
    p.add_argument('--s', type=float, required=True)
    p.add_argument('--p', type=float, required=True)

    p = sub.add_parser('hajlasz', parents=[common], help='Hajłasz s-gradient')
    p.add_argument('--space', required=True)
    p.add_argument('--field', required=True)
    p.add_argument('--s', type=float, required=True)
    p.add_argument('--p', type=float, default=1.0)

    p = sub.add_parser('doubling', parents=[common], help='Doubling and lower-mass estimates')
    p.add_argument('--space', required=True)
    p.add_argument('--depth', type=int, help='Also build nets down to this level')

    p = sub.add_parser('embed', parents=[common], help='Embedding checks')
    p.add_argument('action', nargs='?', choices=['check'], default='check')
    p.add_argument('--kind', choices=[k.value for k in EmbeddingKind], required=True)
    p.add_argument('--space', required=True)
    p.add_argument('--field', help='Field or {"fields": [...]} file; default: seeded trials')
    p.add_argument('--s', type=float, required=True)
    p.add_argument('--p', type=float, required=True)
    p.add_argument('--alpha', type=float)
    p.add_argument('--constant', type=float)
    p.add_argument('--trials', type=int, default=10)
    p.add_argument('--seed', type=int, default=0)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    """Map parsed arguments onto a RunConfig"""
    def opt(name, default=None):
        return getattr(args, name, default)

    return RunConfig(
        command=Command(args.command),
        action=opt('action'),
        space=opt('space'),
        measure=opt('measure'),
        field=opt('field'),
        field2=opt('field2'),
        decomposition=opt('decomposition'),
        out=opt('out'),
        alpha=opt('alpha'),
        s=opt('s'),
        p=opt('p'),
        delta_schedule=tuple(opt('delta_schedule', ())),
        seed=opt('seed', 0),
        n=opt('n'),
        kind=opt('kind'),
        trials=opt('trials', 10),
        jobs=opt('jobs', 1),
        depth=opt('depth'),
        constant=opt('constant'),
        subset=tuple(opt('subset', ())),
        balanced_only=opt('balanced_only', False),
        format=OutputFormat(opt('format', 'json'))
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.schema:
        print(json.dumps(SCHEMAS, indent=2))
        return EXIT_OK
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 1

    logging.basicConfig(
        level=getattr(logging, args.log_level),
        format='%(asctime)s %(levelname)s %(name)s: %(message)s',
        stream=sys.stderr
    )
    config = config_from_args(args)
    controller = CommandController()
    code, payload = controller.run(config)
    if code != EXIT_OK:
        print(json.dumps(payload), file=sys.stderr)
    elif not config.out:
        sys.stdout.write(controller.render(config, payload))
    return code


if __name__ == '__main__':
    sys.exit(main())
