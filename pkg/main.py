#!/usr/bin/env python3
"""
╔══════════════════════════════════════════════════════════════════════════════╗
║                                  MULTIPOLY                                   ║
║               Numerical Laboratory for Multi-Homogeneous Polynomials          ║
╚══════════════════════════════════════════════════════════════════════════════╝

Command-line front end over the library in core/.

Commands:
- norm            sup-norm bracket, optional continuity certificate
- polarize        symmetric form and norm sandwich
- compose-check   ideal inequality for t o P o (u_1, ..., u_m)
- hyper-check     hyper-ideal inequality for R o P o (Q_1, ..., Q_n)
- summing         summing ratio against weak lq norms
- bh-scan         Bohnenblust-Hille ratio scan (CSV + summary JSON)
- ksz             one random-sign instance and its lift

Artifacts go to stdout (or --out); logs and the status line go to stderr.
Exit status: 0 success, 1 malformed input, 2 check failed.

Version: 1.0.0
"""

import sys
import os
import argparse
import logging
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import List, Optional

# Ensure the packages next to this file are importable
MULTIPOLY_ROOT = Path(__file__).parent
sys.path.insert(0, str(MULTIPOLY_ROOT))

_HANDLER_TAG = "_multipoly_handler"


def setup_logging(debug: bool = False):
    """Configure logging system"""
    from config import (
        LOG_FILE, LOG_LEVEL, LOG_FORMAT,
        LOG_DATE_FORMAT, LOG_MAX_SIZE, LOG_BACKUP_COUNT, ENABLE_FILE_LOG
    )

    # Create formatter
    formatter = logging.Formatter(LOG_FORMAT, LOG_DATE_FORMAT)

    # Root logger; drop handlers from an earlier call in the same process
    root_logger = logging.getLogger()
    root_logger.setLevel(getattr(logging, LOG_LEVEL))
    for handler in [h for h in root_logger.handlers if getattr(h, _HANDLER_TAG, False)]:
        root_logger.removeHandler(handler)
        handler.close()

    # Console handler on stderr; stdout carries artifacts only
    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(logging.DEBUG if debug else logging.INFO)
    console_handler.setFormatter(formatter)
    setattr(console_handler, _HANDLER_TAG, True)
    root_logger.addHandler(console_handler)

    # File handler (all levels, rotating)
    if ENABLE_FILE_LOG:
        LOG_FILE.parent.mkdir(parents=True, exist_ok=True)
        file_handler = RotatingFileHandler(
            LOG_FILE,
            maxBytes=LOG_MAX_SIZE,
            backupCount=LOG_BACKUP_COUNT
        )
        file_handler.setLevel(logging.DEBUG)
        file_handler.setFormatter(formatter)
        setattr(file_handler, _HANDLER_TAG, True)
        root_logger.addHandler(file_handler)

    logging.getLogger(__name__).debug("Logging system initialized")


def check_dependencies() -> bool:
    """Check if required dependencies are installed"""
    required = [
        ('numpy', 'numpy'),
        ('scipy', 'scipy'),
        ('colorama', 'colorama'),
    ]

    optional = [
        ('rapidfuzz', 'rapidfuzz', 'command names must be typed exactly'),
        ('psutil', 'psutil', 'worker count falls back to logical CPUs'),
    ]

    missing = []

    for module, package in required:
        try:
            __import__(module)
        except ImportError:
            missing.append(package)

    if missing:
        print("\nMissing required dependencies:", file=sys.stderr)
        for pkg in missing:
            print(f"   • {pkg}", file=sys.stderr)
        print(f"\nInstall with: pip install {' '.join(missing)}", file=sys.stderr)
        print("Or run: pip install -r requirements.txt\n", file=sys.stderr)
        return False

    for module, package, effect in optional:
        try:
            __import__(module)
        except ImportError:
            print(f"Note: {package} not installed, {effect}", file=sys.stderr)

    return True


def _common_parser() -> argparse.ArgumentParser:
    """Flags every command accepts"""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--seed', type=int, help='root seed (default DEFAULT_SEED)')
    common.add_argument('--starts', type=int, help='ascent starts (default DEFAULT_STARTS)')
    common.add_argument('--tol', type=float, help='relative tolerance of inequality checks')
    common.add_argument('--out', type=Path, help='write the artifact here instead of stdout')
    common.add_argument('--field', choices=['real', 'complex'], default='real',
                        help='scalar field of every loaded object')
    common.add_argument('--debug', '-d', action='store_true', help='Enable debug mode')
    return common


def build_parser(dispatcher) -> argparse.ArgumentParser:
    """One subcommand per registered command"""
    parser = argparse.ArgumentParser(prog="multipoly", description="Multipolynomial laboratory")
    subparsers = parser.add_subparsers(dest="command", required=True)
    common = _common_parser()
    for handler in dispatcher.get_registered_commands():
        sub = subparsers.add_parser(handler.name, parents=[common], help=handler.description,
                                    description=handler.description)
        for f in handler.flags:
            sub.add_argument(*f.names, **f.options)
    return parser


def _resolve_command(argv: List[str], dispatcher) -> List[str]:
    """Replace a misspelt command name before argparse sees it"""
    for i, token in enumerate(argv):
        if token.startswith("-"):
            continue
        resolved = dispatcher.resolve_name(token)
        if resolved is not None and resolved != token:
            return argv[:i] + [resolved] + argv[i + 1:]
        break
    return argv


def _status(passed: bool, name: str):
    from colorama import Fore, Style, just_fix_windows_console
    just_fix_windows_console()
    label, color = ("PASS", Fore.GREEN) if passed else ("FAIL", Fore.RED)
    if sys.stderr.isatty():
        label = f"{color}{label}{Style.RESET_ALL}"
    print(f"{label} {name}", file=sys.stderr)


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point"""
    from config import EXIT_OK, EXIT_MALFORMED, EXIT_CHECK_FAILED
    from core.dispatcher import RunConfig, get_dispatcher
    from core.errors import MultipolyError
    import commands  # noqa: F401  registers every command

    dispatcher = get_dispatcher()
    argv = _resolve_command(list(sys.argv[1:] if argv is None else argv), dispatcher)
    parser = build_parser(dispatcher)
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_MALFORMED

    if args.debug:
        os.environ['MULTIPOLY_DEBUG'] = '1'

    if not check_dependencies():
        return EXIT_MALFORMED

    from config import DEBUG_MODE
    setup_logging(debug=args.debug or DEBUG_MODE)
    logger = logging.getLogger(__name__)

    shared = {"command", "seed", "starts", "tol", "out", "field", "debug"}
    try:
        config = RunConfig(
            command=args.command,
            options={k: v for k, v in vars(args).items() if k not in shared},
            seed=args.seed,
            starts=args.starts,
            tol=args.tol,
            output=args.out,
            scalar_field=args.field,
        )
    except MultipolyError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_MALFORMED

    result = dispatcher.dispatch(config)
    if not result["success"]:
        print(f"error: {result['error']}", file=sys.stderr)
        _status(False, args.command)
        return EXIT_MALFORMED

    outcome = result["result"]
    try:
        if config.output is not None:
            config.output.write_text(outcome.text, encoding="utf-8")
        else:
            sys.stdout.write(outcome.text)
            sys.stdout.flush()
        for path, text in outcome.files.items():
            path.write_text(text, encoding="utf-8")
    except OSError as e:
        print(f"error: field 'out': {e}", file=sys.stderr)
        return EXIT_MALFORMED

    logger.debug(f"{result['handler']} finished, passed={outcome.passed}")
    _status(outcome.passed, result["handler"])
    return EXIT_OK if outcome.passed else EXIT_CHECK_FAILED


if __name__ == "__main__":
    sys.exit(main())
