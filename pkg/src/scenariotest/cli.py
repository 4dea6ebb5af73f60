"""Command-line entry point: ``scenariotest <subcommand>``.

Exit codes: 0 success, 1 usage error, 2 replay mismatch, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .batch import CampaignConfig, report_dict, run_campaign, summarize
from .errors import InvalidCampaign, ScenarioTestError, UnknownController, UnknownTemplate
from .library import default_library
from .replay import read_log, render_trace, verify_replay

EXIT_OK, EXIT_USAGE, EXIT_MISMATCH, EXIT_IO = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="scenariotest", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sub.add_parser("list-scenarios", help="list built-in scenario templates")

    run = sub.add_parser("run", help="run a batch-testing campaign")
    run.add_argument("--config", type=Path, help="campaign config JSON file")
    run.add_argument("--template", help="template id (overrides the config file)")
    run.add_argument("--seed", type=int)
    run.add_argument("--budget", type=int)
    run.add_argument("--sampler", choices=("uniform", "genetic"))
    run.add_argument("--controller")
    run.add_argument("--workers", type=int)
    run.add_argument("--out", type=Path, help="output directory")
    run.add_argument("--step-size", type=float)
    run.add_argument("--embed-frames", action="store_true", default=None)

    rep = sub.add_parser("replay", help="re-run a replay log and check it frame by frame")
    rep.add_argument("log", type=Path)

    ren = sub.add_parser("render", help="plot a replay log as SVG")
    ren.add_argument("log", type=Path)
    ren.add_argument("-o", "--output", type=Path, help="output .svg path")

    summ = sub.add_parser("summarize", help="recount a campaign from its case files")
    summ.add_argument("output_dir", type=Path)
    return parser


def _cmd_list(args) -> int:
    lib = default_library()
    for tid, cat in lib.list_templates():
        t = lib.get_template(tid)
        print(f"{tid}  [{cat.value}]")
        for p in t.parameters:
            print(f"    {p.name:<22} [{p.lower:g}, {p.upper:g}] {p.unit}")
    return EXIT_OK


def _cmd_run(args) -> int:
    base = {}
    if args.config is not None:
        with open(args.config, encoding="utf-8") as fh:
            base = json.load(fh)
    overrides = {"template_id": args.template, "seed": args.seed, "budget": args.budget,
                 "sampler": args.sampler, "controller": args.controller, "workers": args.workers,
                 "output_dir": None if args.out is None else str(args.out),
                 "step_size": args.step_size, "embed_frames": args.embed_frames}
    base.update({k: v for k, v in overrides.items() if v is not None})
    if "template_id" not in base:
        raise InvalidCampaign("a template id is required (--template or config file)")
    report = run_campaign(CampaignConfig.from_dict(base))
    print(f"cases={report.cases_run} collisions={report.collision_count} "
          f"near_misses={report.near_miss_count} best_fitness={report.best_fitness:.6g} "
          f"best={report.best_config}")
    return EXIT_OK


def _cmd_replay(args) -> int:
    verdict = verify_replay(read_log(args.log))
    print(verdict)
    return EXIT_OK if verdict.match else EXIT_MISMATCH


def _cmd_render(args) -> int:
    out = args.output
    if out is None:
        name = args.log.name.removesuffix(".json").removesuffix(".replay")
        out = args.log.with_name(name + ".svg")
    render_trace(read_log(args.log), out)
    print(out)
    return EXIT_OK


def _cmd_summarize(args) -> int:
    if not args.output_dir.is_dir():
        raise FileNotFoundError(args.output_dir)
    print(json.dumps(report_dict(summarize(args.output_dir), None), sort_keys=True, indent=2))
    return EXIT_OK


_COMMANDS = {"list-scenarios": _cmd_list, "run": _cmd_run, "replay": _cmd_replay,
             "render": _cmd_render, "summarize": _cmd_summarize}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (UnknownTemplate, UnknownController, InvalidCampaign) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, json.JSONDecodeError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ScenarioTestError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
