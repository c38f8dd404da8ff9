"""Command line interface for the glove pipeline.

Subcommands cover the full workflow: synthesize a corpus (gen), train and
evaluate the classifier (train, eval), inspect the actuator model
(simulate), execute a rehabilitation session (run), serve it to UIs
(serve), and re-emit recorded logs (replay).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

from . import __version__
from .actuator import default_spec, trajectory
from .classifier import (
    KnnModel,
    LabeledSample,
    SWEPT_KS,
    evaluate,
    fit,
    load_model,
    save_model,
)
from .control import default_glove
from .errors import (
    CalibrationError,
    ParseError,
    PressureRangeError,
    RehabGloveError,
    ValidationError,
)
from .features import extract
from .service import SessionServer, encode_wire, event_to_wire
from .session import (
    Protocol,
    default_protocol,
    load_log,
    load_protocol,
    replay,
    run_session,
    save_log,
)
from .signal import (
    GESTURE_LABELS,
    auto_segmentation_config,
    ingest_csv,
    rectify,
    segment_gestures,
    synth_gesture_stream,
    write_csv,
)

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_VALIDATION = 4
EXIT_PRESSURE = 5
EXIT_CALIBRATION = 6
EXIT_IO = 7

_EPILOG = """\
exit codes:
  0  success
  1  unexpected internal error
  2  bad usage (unknown flag, missing argument)
  3  unreadable input (CSV/JSON/log parse failure)
  4  readable input violating an invariant (validation failure)
  5  pressure outside an actuator's characterized range
  6  calibration table rejected
  7  file system or network error
"""


def _labeled_paths(values: list[str]) -> list[tuple[str, Path]]:
    """Parse repeated --data LABEL:PATH arguments."""
    out = []
    for item in values:
        label, sep, path = item.partition(":")
        if not sep or label not in GESTURE_LABELS:
            raise ValidationError(
                f"--data expects grasp:PATH or release:PATH, got {item!r}"
            )
        out.append((label, Path(path)))
    return out


def _corpus_samples(data: list[str]) -> list[LabeledSample]:
    """Segment labeled CSV streams and extract one sample per window."""
    samples = []
    for label, path in _labeled_paths(data):
        stream = rectify(ingest_csv(path))
        cfg = auto_segmentation_config(stream)
        for w in segment_gestures(stream, cfg):
            samples.append(LabeledSample(features=extract(w), label=label))
    if not samples:
        raise ValidationError("corpus produced no gesture windows")
    return samples


def cmd_gen(args) -> int:
    stream = synth_gesture_stream(
        kind=args.kind,
        count=args.count,
        sample_rate_hz=args.rate,
        seed=args.seed,
        separation=args.separation,
    )
    write_csv(stream, args.out)
    print(f"wrote {len(stream)} samples ({args.count} {args.kind} bursts) to {args.out}")
    return EXIT_OK


def cmd_train(args) -> int:
    samples = _corpus_samples(args.data)
    model = fit(samples, k=args.k, use_scaler=args.scaler)
    save_model(model, args.out)
    by_label = {lbl: sum(1 for s in samples if s.label == lbl) for lbl in GESTURE_LABELS}
    print(f"trained k={args.k} model on {len(samples)} windows {by_label}; saved to {args.out}")
    return EXIT_OK


def _print_sweep_table(rows: list[tuple[int, float, float]]) -> None:
    print(f"{'K':>3}  {'CPU time (s)':>14}  {'Accuracy (%)':>13}")
    for k, mean_t, acc in rows:
        print(f"{k:>3}  {mean_t:>14.6f}  {acc:>13.1f}")


def cmd_eval(args) -> int:
    model = load_model(args.model)
    validation = _corpus_samples(args.data)
    if args.k_sweep:
        ks = [int(x) for x in args.k_sweep.split(",") if x.strip()]
        rows = []
        reports = []
        for k in ks:
            swept = KnnModel(samples=model.samples, k=k, scaler=model.scaler)
            report = evaluate(swept, validation)
            rows.append((k, report.mean_predict_time_s, report.accuracy_pct))
            reports.append(report.to_dict())
        _print_sweep_table(rows)
        if args.json_out:
            Path(args.json_out).write_text(json.dumps(reports, indent=2) + "\n")
    else:
        report = evaluate(model, validation)
        print(
            f"k={report.k}  accuracy {report.accuracy_pct:.1f}%  "
            f"mean predict {report.mean_predict_time_s:.6f} s  "
            f"confusion {report.confusion}"
        )
        if args.json_out:
            Path(args.json_out).write_text(json.dumps(report.to_dict(), indent=2) + "\n")
    return EXIT_OK


def cmd_simulate(args) -> int:
    spec = default_spec(args.version, args.segments)
    points = trajectory(spec, args.pressure)
    lines = ["x_mm,y_mm"]
    lines.extend(f"{float(x)!r},{float(y)!r}" for x, y in points)
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"wrote {len(points)} trajectory points to {args.out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_run(args) -> int:
    model = load_model(args.model)
    source = rectify(ingest_csv(args.source))
    protocol = load_protocol(args.protocol) if args.protocol else default_protocol()
    channels = default_glove(args.glove_version)
    log = run_session(
        protocol,
        source,
        model,
        channels,
        seed=args.seed,
        extra_header={"source_file": str(args.source)},
    )
    if args.log:
        save_log(log, args.log)
        print(f"wrote {len(log.events)} events to {args.log}")
    tally = log.tally()
    end = log.events[-1].payload if log.events else {}
    print(f"session ended ({end.get('reason', 'unknown')}): {tally}")
    return EXIT_OK


def cmd_serve(args) -> int:
    if args.replay_log:
        server = SessionServer(
            host=args.host,
            port=args.port,
            replay_log=load_log(args.replay_log),
            pace=args.pace,
        )
    else:
        if not (args.model and args.source):
            raise ValidationError("serve needs --model and --source (or --replay-log)")
        model = load_model(args.model)
        source = rectify(ingest_csv(args.source))
        protocol = load_protocol(args.protocol) if args.protocol else default_protocol()
        channels = default_glove(args.glove_version)

        def session_factory(protocol, on_event, on_frame, control, pace):
            return run_session(
                protocol or default_protocol(),
                source,
                model,
                channels,
                on_event=on_event,
                on_frame=on_frame,
                control=control,
                pace=pace,
            )

        server = SessionServer(
            host=args.host,
            port=args.port,
            session_factory=session_factory,
            protocol=protocol,
            pace=args.pace,
        )
    server.start()
    host, port = server.address
    print(f"listening on {host}:{port}", flush=True)
    server.serve_forever()
    return EXIT_OK


def cmd_replay(args) -> int:
    log = load_log(args.log)
    for ev in replay(log, fast=args.fast, sleeper=time.sleep):
        sys.stdout.buffer.write(encode_wire(event_to_wire(ev)))
    sys.stdout.buffer.flush()
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rehabglove",
        description="EMG-driven soft pneumatic rehabilitation glove toolkit",
        epilog=_EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="synthesize a gesture stream CSV")
    p.add_argument("--kind", choices=GESTURE_LABELS, required=True)
    p.add_argument("--count", type=int, required=True, help="number of bursts")
    p.add_argument("--rate", type=float, default=1000.0, help="sample rate in Hz")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--separation", type=float, default=1.0, help="class contrast in [0, 1]")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("train", help="fit a KNN model from labeled stream CSVs")
    p.add_argument(
        "--data", action="append", required=True, metavar="LABEL:PATH",
        help="labeled stream CSV, repeatable (grasp:train_g.csv release:train_r.csv)",
    )
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--scaler", action="store_true", help="standardize features")
    p.add_argument("--out", required=True, help="model JSON path")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a model on a labeled corpus")
    p.add_argument("--model", required=True)
    p.add_argument("--data", action="append", required=True, metavar="LABEL:PATH")
    p.add_argument(
        "--k-sweep", metavar="K,K,...",
        help=f"evaluate at several k values, e.g. {','.join(map(str, SWEPT_KS))}",
    )
    p.add_argument("--json-out", help="also write the report(s) as JSON")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("simulate", help="emit an actuator bending trajectory as CSV")
    p.add_argument("--version", default="V2", help="actuator version, V1 or V2")
    p.add_argument("--segments", type=int, required=True)
    p.add_argument("--pressure", type=float, required=True, help="kPa")
    p.add_argument("--out", help="CSV path (stdout when omitted)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("run", help="execute a session against a recorded stream")
    p.add_argument("--model", required=True)
    p.add_argument("--source", required=True, help="stream CSV")
    p.add_argument("--protocol", help="protocol JSON (default: built-in alternating)")
    p.add_argument("--log", help="write the event log here (NDJSON)")
    p.add_argument("--glove-version", default="V2")
    p.add_argument("--seed", type=int, default=None, help="recorded in the log header")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("serve", help="serve a live or replayed session over TCP NDJSON")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=0, help="0 picks a free port")
    p.add_argument("--model")
    p.add_argument("--source")
    p.add_argument("--protocol")
    p.add_argument("--glove-version", default="V2")
    p.add_argument("--replay-log", help="serve a recorded log instead of a live session")
    p.add_argument("--pace", action="store_true", help="real-time pacing")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("replay", help="re-emit a recorded log as wire messages")
    p.add_argument("--log", required=True)
    p.add_argument("--fast", action="store_true", help="no pacing between events")
    p.set_defaults(func=cmd_replay)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except PressureRangeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRESSURE
    except CalibrationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CALIBRATION
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except RehabGloveError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except BrokenPipeError:
        # Downstream closed early (e.g. piped into head); not a failure.
        devnull = os.open(os.devnull, os.O_WRONLY)
        os.dup2(devnull, sys.stdout.fileno())
        return EXIT_OK
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except KeyboardInterrupt:
        return EXIT_OK
    except Exception as exc:  # pragma: no cover - defensive
        print(f"unexpected error: {exc!r}", file=sys.stderr)
        return EXIT_UNEXPECTED


if __name__ == "__main__":
    sys.exit(main())
