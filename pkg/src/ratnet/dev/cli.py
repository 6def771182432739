"""
CLI for ratnet development utilities.
"""

import sys

from ratnet.errors import RatnetError
from ratnet.storage import load_network
from ratnet.storage.checkpoint import Network
from ratnet.constructive.network import RationalNetwork
from ratnet.ui import show_summary
from ratnet.utils.logging_config import get_log_dir, get_log_file


def log_path() -> bool:
    print(f'Log file: {get_log_file()}')
    return True


def clear_logs() -> bool:
    """
    Return `True` if every log file was deleted, or if there were none.
    """
    log_dir = get_log_dir()
    if not log_dir.exists():
        print(f'Log directory ({log_dir}) does not exist')
        return True

    ok = True
    for path in sorted(log_dir.glob('ratnet.log*')):
        try:
            path.unlink()
            print(f'Deleted {path}')
        except OSError as e:
            print(f'Could not delete {path}: {e}')
            ok = False
    return ok


def describe(net: Network) -> list[tuple[str, object]]:
    if isinstance(net, RationalNetwork):
        kinds = sorted({
            type(a).__name__ for layer in net.layers for a in layer.activations
        })
        return [
            ('network', 'graph'),
            ('widths', [net.input_dim] + [l.width for l in net.layers]
             + [net.output_dim]),
            ('activations', ', '.join(kinds) or '-'),
            ('size', net.size()),
            ('relays', net.relay_count()),
            ('depth', net.depth()),
            ('params', net.param_count()),
        ]
    return [
        ('network', 'dense'),
        ('widths', list(net.layer_dims)),
        ('activations', ', '.join(s.kind.value for s in net.activations) or '-'),
        ('size', sum(net.layer_dims[1:-1])),
        ('depth', net.hidden_layers),
        ('params', net.trainable_param_count()),
    ]


def inspect(path: str) -> bool:
    try:
        net = load_network(path)
    except RatnetError as e:
        print(f'Cannot inspect {path}: {e}')
        return False
    show_summary(describe(net))
    return True


def help_message() -> bool:
    print('Usage: ratnet-dev <command>')
    print('Commands:')
    print('    logs               - Print the path of the log file')
    print('    clear-logs         - Delete the log file and its rotations')
    print('    inspect <path>     - Summarize a ratnet-v1 checkpoint')
    print('    help               - Show this message')
    return True


def main() -> None:
    if len(sys.argv) < 2:
        help_message()
        sys.exit(1)

    commands = {
        'logs': log_path,
        'clear-logs': clear_logs,
        'help': help_message,
    }

    command = sys.argv[1].lower()
    if command == 'inspect':
        if len(sys.argv) != 3:
            print('Usage: ratnet-dev inspect <path>')
            sys.exit(1)
        ok = inspect(sys.argv[2])
    elif command in commands:
        ok = commands[command]()
    else:
        print(f'Unknown argument: {command}')
        print('Run "ratnet-dev help"')
        sys.exit(1)

    sys.exit(0 if ok else 1)


if __name__ == '__main__':
    main()
