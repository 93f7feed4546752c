"""Command-line front door: stage scripts, count sequences, mine, serve."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

from . import dialog as dlg
from . import site as sm
from .service import resolve_config, run_service

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_REJECTED = 2


def _out(line: str) -> None:
    print(line)


def _err(line: str) -> None:
    print(line, file=sys.stderr)


def _load_site_arg(path: str) -> sm.SiteTree:
    return sm.load_site(Path(path).read_text(encoding="utf-8"))


def cmd_stage(args: argparse.Namespace) -> int:
    try:
        node = dlg.simplify(dlg.parse_script(args.script))
        utterances = [dlg.tokenize_utterance(u) for u in args.utterances]
        if any(not u for u in utterances):
            raise ValueError("utterances must contain at least one token")
    except (dlg.ScriptError, ValueError) as exc:
        _err(f"error: {exc}")
        return EXIT_USAGE
    steps = []
    any_rejected = False
    for utterance in utterances:
        outcome = dlg.apply_utterance(node, utterance)
        node = outcome.result
        any_rejected = any_rejected or not outcome.accepted
        steps.append({
            "utterance": list(utterance),
            "accepted": outcome.accepted,
            "state": dlg.render_script(node),
        })
    if args.format == "json":
        _out(json.dumps({"steps": steps, "completed": dlg.is_complete(node)}))
    else:
        for step in steps:
            _out(step["state"])
    return EXIT_REJECTED if any_rejected else EXIT_OK


def cmd_count(args: argparse.Namespace) -> int:
    try:
        if args.script is not None:
            count = dlg.enumerate_sequences(dlg.parse_script(args.script),
                                            multi_token=args.multi_token,
                                            state_cap=args.state_cap)
            closed = None
        else:
            tree = _load_site_arg(args.site)
            count = sm.count_sequences(tree, multi_token=args.multi_token,
                                       mode=args.mode, state_cap=args.state_cap)
            closed = sm.closed_form_used(tree, mode=args.mode)
    except (dlg.ScriptError, dlg.EnumerationLimitError, sm.SiteError, OSError, ValueError) as exc:
        _err(f"error: {exc}")
        return EXIT_USAGE
    if args.format == "json":
        _out(json.dumps({"count": count, "closed_form": closed}))
    else:
        _out(str(count))
        if closed:
            _err(f"closed form: {closed}")
    return EXIT_OK


def cmd_mine(args: argparse.Namespace) -> int:
    try:
        tree = _load_site_arg(args.site)
    except (sm.SiteError, OSError) as exc:
        _err(f"error: {exc}")
        return EXIT_USAGE
    fds = sm.mine_fds(tree)
    if args.format == "json":
        _out(json.dumps({"dependencies": [
            {"lhs": sorted(fd.lhs), "rhs": sorted(fd.rhs)} for fd in fds]}))
    elif not fds:
        _out("0 dependencies")
    else:
        for fd in fds:
            _out(f"{{{', '.join(sorted(fd.lhs))}}} -> {{{', '.join(sorted(fd.rhs))}}}")
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    config = resolve_config(listen=args.listen, session_ttl=args.session_ttl,
                            cache_cap=args.cache_cap, state_cap=args.state_cap)
    run_service(config)
    return EXIT_OK


def cmd_replay(args: argparse.Namespace) -> int:
    """Replay a JSON trace file and verify its expectations.

    Schema: {"script": ...} or {"site": path, "mode": ...}, plus
    "steps": [{"utterance": [...], "expect_accepted": bool,
    "expect_state": script, "expect_completed": bool}, ...]; every
    expectation is optional.
    """
    try:
        trace = json.loads(Path(args.trace).read_text(encoding="utf-8"))
        if "script" in trace:
            node = dlg.simplify(dlg.parse_script(trace["script"]))
        elif "site" in trace:
            tree = _load_site_arg(trace["site"])
            node = dlg.simplify(sm.site_to_dialog(tree, trace.get("mode", "out_of_turn")))
        else:
            raise ValueError('trace requires a "script" or "site" entry')
        steps = trace["steps"]
        for step in steps:
            utterance = step["utterance"]
            if not isinstance(utterance, list) or not utterance or \
                    not all(isinstance(t, str) for t in utterance):
                raise ValueError("every step needs a non-empty utterance list")
            if "expect_state" in step:
                dlg.parse_script(step["expect_state"])
    except (OSError, ValueError, KeyError, dlg.ScriptError, sm.SiteError) as exc:
        _err(f"error: {exc}")
        return EXIT_USAGE

    failures = 0
    results = []
    for i, step in enumerate(steps):
        outcome = dlg.apply_utterance(node, step["utterance"])
        node = outcome.result
        state = dlg.render_script(node)
        problems = []
        if "expect_accepted" in step and outcome.accepted != step["expect_accepted"]:
            problems.append(f"accepted={outcome.accepted}")
        if "expect_state" in step and state != step["expect_state"]:
            problems.append(f"state={state}")
        if "expect_completed" in step and dlg.is_complete(node) != step["expect_completed"]:
            problems.append(f"completed={dlg.is_complete(node)}")
        failures += bool(problems)
        results.append({"step": i, "state": state, "accepted": outcome.accepted,
                        "problems": problems})
    if args.format == "json":
        _out(json.dumps({"results": results, "failures": failures}))
    else:
        for r in results:
            status = "ok" if not r["problems"] else "MISMATCH " + "; ".join(r["problems"])
            _out(f"step {r['step']}: {r['state']} [{status}]")
    return EXIT_REJECTED if failures else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="outturn",
        description="Stage dialog scripts, prune sites, and serve mixed-initiative sessions.")
    parser.add_argument("--format", choices=("text", "json"), default="text",
                        help="output format (default: text)")
    sub = parser.add_subparsers(dest="command", required=True)

    p_stage = sub.add_parser("stage", help="apply utterances to a dialog script")
    p_stage.add_argument("script", help="dialog script in staging notation")
    p_stage.add_argument("utterances", nargs="*",
                         help="each argument is one utterance; quote multi-token turns")
    p_stage.set_defaults(func=cmd_stage)

    p_count = sub.add_parser("count", help="count completing input sequences")
    source = p_count.add_mutually_exclusive_group(required=True)
    source.add_argument("--script", help="dialog script in staging notation")
    source.add_argument("--site", help="path to a site document (XML or JSON)")
    p_count.add_argument("--multi-token", action="store_true",
                         help="allow several tokens per utterance")
    p_count.add_argument("--mode", choices=("browsing", "out_of_turn"),
                         default="out_of_turn", help="dialog form for --site")
    p_count.add_argument("--state-cap", type=int, default=dlg.DEFAULT_STATE_CAP)
    p_count.set_defaults(func=cmd_count)

    p_mine = sub.add_parser("mine", help="mine functional dependencies from a site")
    p_mine.add_argument("site", help="path to a site document")
    p_mine.set_defaults(func=cmd_mine)

    p_serve = sub.add_parser("serve", help="run the interaction service")
    p_serve.add_argument("--listen", help="host:port (env OUTTURN_LISTEN)")
    p_serve.add_argument("--session-ttl", type=float, help="idle expiry seconds")
    p_serve.add_argument("--cache-cap", type=int, help="per-site cache entries")
    p_serve.add_argument("--state-cap", type=int, help="enumeration state cap")
    p_serve.set_defaults(func=cmd_serve)

    p_replay = sub.add_parser("replay", help="replay and verify a trace file")
    p_replay.add_argument("trace", help="path to a JSON trace file")
    p_replay.set_defaults(func=cmd_replay)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
