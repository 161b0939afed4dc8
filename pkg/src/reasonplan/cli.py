"""Command-line entry points tying the stack together.

Subcommands: gen-data, train, eval-open, eval-closed, report, ablate,
bench-kernels. Every command writes a manifest next to its primary output so
artifacts stay reproducible from (config, seed, code version).
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .config import Config, load_config
from .hashing import canonical_json, file_hash, fnv1a64_hex

MANIFEST_SCHEMA = "reasonplan.manifest.v1"


def _overrides(pairs) -> dict:
    out = {}
    for pair in pairs or []:
        key, _, value = pair.partition("=")
        if not _ or not key:
            raise SystemExit(f"--set expects key=value, got {pair!r}")
        out[key.strip()] = value.strip()
    return out


def _load_cfg(args) -> Config:
    return load_config(getattr(args, "config", None), _overrides(getattr(args, "set", None)))


def write_manifest(out_path, command: str, cfg: Config, t0: float,
                   dataset_hash=None, checkpoint_hash=None, extra=None) -> dict:
    manifest = {
        "schema": MANIFEST_SCHEMA,
        "command": command,
        "config_hash": cfg.hash(),
        "dataset_hash": dataset_hash,
        "checkpoint_hash": checkpoint_hash,
        "code_version": __version__,
        "seed": cfg.train.seed,
        "wall_time_s": round(time.time() - t0, 3),
        "resolved_config": cfg.to_flat(),
    }
    if extra:
        manifest.update(extra)
    Path(str(out_path) + ".manifest.json").write_text(canonical_json(manifest) + "\n")
    return manifest


def _parse_list(text: str) -> list:
    return [x for x in (s.strip() for s in text.split(",")) if x]


def _scenario_pairs(args):
    kinds = _parse_list(args.scenarios)
    seeds = [int(s) for s in _parse_list(args.seeds)]
    return [(k, s) for k in kinds for s in seeds]


def cmd_gen_data(args) -> int:
    from .annotate import generate_dataset, serialize_record
    from .text import build_vocab

    cfg = _load_cfg(args)
    t0 = time.time()
    stages = tuple(_parse_list(args.stages)) if args.stages else None
    records, stats = generate_dataset(
        _scenario_pairs(args), args.out, cfg, stages=stages,
        max_records=args.max_records)
    vocab = build_vocab([serialize_record(r) for r in records])
    vocab.save(str(args.out) + ".vocab.txt")
    write_manifest(args.out, "gen-data", cfg, t0, dataset_hash=stats["file_hash"],
                   extra={"stats": {k: v for k, v in stats.items() if k != "top_words"}})
    print(f"dataset: {stats['count']} records -> {args.out}")
    print(f"  words/record: mean {stats['word_mean']} "
          f"range [{stats['word_min']}, {stats['word_max']}]")
    print(f"  vocab: {len(vocab)} words -> {args.out}.vocab.txt")
    print(f"  per-scenario: {stats['per_scenario']}")
    print(f"  hash: {stats['file_hash']}")
    return 0


def _load_dataset_and_vocab(data_path, vocab_path=None):
    from .annotate import load_dataset
    from .text import Vocab

    records = load_dataset(data_path)
    vpath = Path(vocab_path) if vocab_path else Path(str(data_path) + ".vocab.txt")
    if not vpath.exists():
        raise SystemExit(f"vocab file {vpath} not found (generate it with gen-data)")
    return records, Vocab.load(vpath)


def cmd_train(args) -> int:
    from .model import load_checkpoint, save_checkpoint
    from .train import train

    cfg = _load_cfg(args)
    t0 = time.time()
    records, vocab = _load_dataset_and_vocab(args.data, args.vocab)
    dataset_hash = file_hash(args.data)

    init = None
    if args.init:
        init, meta = load_checkpoint(args.init)
        if meta.get("vocab") != vocab.id2word:
            raise SystemExit("checkpoint vocabulary does not match the dataset vocab")
    if args.stage == 2 and init is None and not args.cold_start:
        raise SystemExit("stage 2 inherits stage-1 weights: pass --init "
                         "or opt out explicitly with --cold-start")
    if args.stage == 2 and init is None and args.cold_start:
        from .train import init_params
        init = init_params(cfg, len(vocab), cfg.train.seed)

    log_path = args.log or (str(args.out) + ".metrics.jsonl")
    params, metrics = train(records, vocab, cfg, stage=args.stage, init=init,
                            steps=args.steps, log_path=log_path,
                            checkpoint_path=args.out,
                            progress=args.progress)
    meta = {"stage": args.stage, "config": cfg.to_flat(), "vocab": vocab.id2word,
            "dataset_hash": dataset_hash, "seed": cfg.train.seed}
    ckpt_hash = save_checkpoint(params, meta, args.out)
    write_manifest(args.out, f"train-stage{args.stage}", cfg, t0,
                   dataset_hash=dataset_hash, checkpoint_hash=ckpt_hash,
                   extra={"steps": len(metrics),
                          "final": metrics[-1] if metrics else None})
    final = metrics[-1]
    print(f"stage {args.stage}: {len(metrics)} steps, "
          f"L_image {final['loss_image']:.5f} L_text {final['loss_text']:.4f}")
    print(f"checkpoint: {args.out} ({ckpt_hash})")
    return 0


def _load_model(checkpoint_path):
    from .model import load_checkpoint
    from .text import Vocab

    params, meta = load_checkpoint(checkpoint_path)
    vocab = Vocab.__new__(Vocab)
    vocab.id2word = list(meta["vocab"])
    vocab.word2id = {w: i for i, w in enumerate(vocab.id2word)}
    vocab.unk_id = vocab.word2id["<unk>"]
    cfg = Config()
    for key, value in meta.get("config", {}).items():
        cfg.set_key(key, str(value))
    return params, vocab, cfg, meta


def cmd_eval_open(args) -> int:
    from .annotate import load_dataset
    from .evaluate import open_loop_l2

    t0 = time.time()
    params, vocab, cfg, _ = _load_model(args.checkpoint)
    if args.config or args.set:
        cfg = _load_cfg(args)
    records = load_dataset(args.data)
    report = open_loop_l2(params, vocab, records, cfg)
    report["schema"] = "reasonplan.open_loop.v1"
    Path(args.out).write_text(canonical_json(report) + "\n")
    write_manifest(args.out, "eval-open", cfg, t0,
                   dataset_hash=file_hash(args.data),
                   checkpoint_hash=file_hash(args.checkpoint))
    print(f"open-loop L2: {report['l2_mean']:.4f} m over {report['count']} records "
          f"({report['parse_failures']} parse failures)")
    return 0


DEV_SUITE = [(k, 0) for k in (
    "DOS01_parked_cars", "DOS02_sudden_brake", "DOS03_left_turn", "DOS04_red_light",
    "merge", "overtake", "give_way", "sign_stop", "pedestrian_crossing",
    "accident_two_ways")]


def _suite_pairs(args):
    if args.scenarios:
        return _scenario_pairs(args)
    if args.suite == "dev":
        return DEV_SUITE
    seeds = [int(s) for s in _parse_list(args.seeds)] if args.seeds else [0, 1, 2]
    return [(k, s) for k, _ in DEV_SUITE for s in seeds]


def cmd_eval_closed(args) -> int:
    from .evaluate import ModelPolicy, run_episode, summarize_episodes
    from .sim import ExpertPolicy, make_scenario

    cfg = _load_cfg(args)
    t0 = time.time()
    params = vocab = None
    ckpt_hash = None
    if not args.expert:
        if not args.checkpoint:
            raise SystemExit("eval-closed needs --checkpoint or --expert")
        params, vocab, cfg, _ = _load_model(args.checkpoint)
        if args.config or args.set:
            cfg = _load_cfg(args)
        ckpt_hash = file_hash(args.checkpoint)

    results = []
    with Path(args.out).open("w") as fh:
        for kind, seed in _suite_pairs(args):
            spec = make_scenario(kind, seed)
            policy = (ExpertPolicy(spec, cfg.sim) if args.expert
                      else ModelPolicy(params, vocab, cfg))
            result, _ = run_episode(spec, policy, cfg)
            results.append(result)
            fh.write(canonical_json(result.to_dict()) + "\n")
            print(f"  {spec.name:28s} DS {result.driving_score:6.1f} "
                  f"RC {result.rc:.2f} IS {result.infraction_score:.2f} "
                  f"ticks {result.ticks}")
        summary = summarize_episodes(results)
        fh.write(canonical_json(summary) + "\n")
    write_manifest(args.out, "eval-closed", cfg, t0, checkpoint_hash=ckpt_hash,
                   extra={"summary": summary})
    print(f"summary: DS {summary['driving_score']:.2f} SR {summary['success_rate']:.1f}% "
          f"Effi {summary['efficiency']:.1f} Comf {summary['comfort']:.1f} "
          f"ability mean {summary['ability']['mean']:.1f}")
    return 0


def cmd_report(args) -> int:
    cfg = _load_cfg(args)
    t0 = time.time()
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    rows = []
    for run_path in args.runs:
        lines = [json.loads(l) for l in Path(run_path).read_text().splitlines()]
        summary = next((l for l in lines if l.get("schema") == "reasonplan.summary.v1"), None)
        if summary is None:
            raise SystemExit(f"{run_path}: no summary record")
        rows.append({"run": str(run_path), **{k: summary[k] for k in (
            "driving_score", "route_completion", "infraction_score",
            "success_rate", "efficiency", "comfort")},
            "ability_mean": summary["ability"]["mean"]})
    rows.sort(key=lambda r: -r["driving_score"])

    table = ["run                              DS      RC     IS     SR     Effi   Comf   Ability"]
    for r in rows:
        table.append(f"{Path(r['run']).name:32s} {r['driving_score']:6.2f} "
                     f"{r['route_completion']:6.3f} {r['infraction_score']:6.3f} "
                     f"{r['success_rate']:6.1f} {r['efficiency']:6.1f} "
                     f"{r['comfort']:6.1f} {r['ability_mean']:6.1f}")
    text = "\n".join(table)
    (out_dir / "comparison.txt").write_text(text + "\n")
    (out_dir / "comparison.json").write_text(canonical_json(rows) + "\n")

    for metrics_path in args.metrics or []:
        curve = ["step,stage,loss_image,loss_text,loss_total"]
        for line in Path(metrics_path).read_text().splitlines():
            row = json.loads(line)
            curve.append(f"{row['step']},{row['stage']},{row['loss_image']},"
                         f"{row['loss_text']},{row['loss_total']}")
        name = Path(metrics_path).stem + ".curve.csv"
        (out_dir / name).write_text("\n".join(curve) + "\n")

    write_manifest(out_dir / "comparison.json", "report", cfg, t0)
    print(text)
    return 0


def cmd_ablate(args) -> int:
    from .annotate import generate_dataset, serialize_record
    from .evaluate import ModelPolicy, open_loop_l2, run_episode
    from .sim import make_scenario
    from .text import build_vocab
    from .train import train

    cfg = _load_cfg(args)
    t0 = time.time()
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    pairs = [(args.scenario, s) for s in [int(x) for x in _parse_list(args.seeds)]]

    def run_cell(name, lambda_image, stages, seed):
        cell_cfg = _load_cfg(args)
        cell_cfg.train.lambda_image = lambda_image
        cell_cfg.train.seed = seed
        records, stats = generate_dataset(
            pairs, out_dir / f"{name}.jsonl", cell_cfg, stages=stages,
            max_records=args.samples)
        vocab = build_vocab([serialize_record(r) for r in records])
        p1, _ = train(records, vocab, cell_cfg, stage=1)
        p2, metrics = train(records, vocab, cell_cfg, stage=2, init=p1,
                            steps=args.steps)
        spec = make_scenario(*pairs[0])
        result, _ = run_episode(spec, ModelPolicy(p2, vocab, cell_cfg), cell_cfg)
        ol = open_loop_l2(p2, vocab, records[:16], cell_cfg)
        return {
            "cell": name, "lambda_image": lambda_image,
            "stages": list(stages) if stages else ["SU", "TS", "CO", "MA"],
            "dataset": stats["count"],
            "loss_text": metrics[-1]["loss_text"],
            "loss_image": metrics[-1]["loss_image"],
            "driving_score": result.driving_score,
            "route_completion": result.rc,
            "infraction_score": result.infraction_score,
            "open_loop_l2": ol["l2_mean"],
        }

    rows = []
    for lam in (0.0, 0.25, 0.5, 1.0, 2.0):
        rows.append(run_cell(f"imgw_{lam:g}", lam, None, cfg.train.seed))
        print(f"  image-weight {lam:g}: DS {rows[-1]['driving_score']:.1f} "
              f"L_text {rows[-1]['loss_text']:.3f}")

    grid_rows = []
    for nsp_on in (False, True):
        for decot_on in (False, True):
            name = f"nsp{int(nsp_on)}_decot{int(decot_on)}"
            stages = None if decot_on else ()
            grid_rows.append(run_cell(name, 1.0 if nsp_on else 0.0, stages,
                                      cfg.train.seed))
            print(f"  {name}: DS {grid_rows[-1]['driving_score']:.1f}")

    nsp_on_ds = next(r["driving_score"] for r in grid_rows if r["cell"] == "nsp1_decot1")
    nsp_off_ds = next(r["driving_score"] for r in grid_rows if r["cell"] == "nsp0_decot1")
    noise_bound = args.noise_bound
    soft_check = {
        "claim": "DS(nsp off) does not exceed DS(nsp on) by more than the noise bound",
        "nsp_on_ds": nsp_on_ds,
        "nsp_off_ds": nsp_off_ds,
        "noise_bound": noise_bound,
        "holds": bool(nsp_off_ds <= nsp_on_ds + noise_bound),
    }

    report = {
        "schema": "reasonplan.ablation.v1",
        "image_weight_grid": rows,
        "module_grid": grid_rows,
        "soft_check": soft_check,
    }
    (out_dir / "ablation.json").write_text(canonical_json(report) + "\n")
    lines = ["cell            lambda_img  DS      L_text  L2"]
    for r in rows + grid_rows:
        lines.append(f"{r['cell']:15s} {r['lambda_image']:<10g} "
                     f"{r['driving_score']:7.2f} {r['loss_text']:7.3f} "
                     f"{r['open_loop_l2']:6.3f}")
    lines.append(f"soft check: {soft_check['claim']} -> holds={soft_check['holds']} "
                 f"(on={nsp_on_ds:.1f}, off={nsp_off_ds:.1f}, bound={noise_bound})")
    (out_dir / "ablation.txt").write_text("\n".join(lines) + "\n")
    write_manifest(out_dir / "ablation.json", "ablate", cfg, t0)
    print("\n".join(lines))
    return 0


def cmd_bench_kernels(args) -> int:
    from .kernels import available_backends
    from .sim import Simulator, make_scenario, render_pseudo_cameras
    from .config import SimConfig

    sim_cfg = SimConfig(raster_w=args.raster, raster_h=args.raster)
    spec = make_scenario("DOS01_parked_cars", 0)
    world = Simulator(spec, sim_cfg).reset()
    backends = available_backends()
    print(f"raster {args.raster}x{args.raster}, 6 cameras, "
          f"{len(world.agents)} agents, {args.repeats} repeats")
    base = None
    rates = {}
    for name, fn in backends.items():
        frames = render_pseudo_cameras(world, sim_cfg, render_fn=fn)
        if base is None:
            base = frames
        else:
            same = all(np.array_equal(a.raster, b.raster) for a, b in zip(base, frames))
            print(f"  {name}: rasters identical to reference: {same}")
        t0 = time.time()
        for _ in range(args.repeats):
            render_pseudo_cameras(world, sim_cfg, render_fn=fn)
        dt = time.time() - t0
        rates[name] = args.repeats / dt
        cells = 6 * args.raster * args.raster * args.repeats / dt
        print(f"  {name:9s} {args.repeats / dt:8.1f} renders/s  ({cells/1e6:.2f} Mcells/s)")
    if "compiled" in rates and "python" in rates:
        print(f"  speedup: {rates['compiled'] / rates['python']:.1f}x")
    else:
        print("  compiled kernel not built; only the python fallback was timed")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="reasonplan",
        description="Desk-scale closed-loop driving stack: data generation, "
                    "training, and evaluation.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="flat key=value config file")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override one config key")

    p = sub.add_parser("gen-data", help="generate a reasoning dataset from expert rollouts")
    p.add_argument("--scenarios", required=True, help="comma-separated scenario kinds")
    p.add_argument("--seeds", default="0", help="comma-separated seeds")
    p.add_argument("--out", required=True)
    p.add_argument("--stages", help="stage subset to serialize, e.g. SU,TS")
    p.add_argument("--max-records", type=int)
    common(p)
    p.set_defaults(fn=cmd_gen_data)

    p = sub.add_parser("train", help="train one stage")
    p.add_argument("--data", required=True)
    p.add_argument("--vocab", help="vocab file (default: <data>.vocab.txt)")
    p.add_argument("--stage", type=int, choices=(1, 2), required=True)
    p.add_argument("--init", help="checkpoint to inherit weights from")
    p.add_argument("--cold-start", action="store_true",
                   help="allow stage 2 from random init")
    p.add_argument("--steps", type=int, help="override the epoch-derived step count")
    p.add_argument("--out", required=True)
    p.add_argument("--log", help="metrics log path (default: <out>.metrics.jsonl)")
    p.add_argument("--progress", type=int, default=0,
                   help="print a progress line every N steps")
    common(p)
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("eval-open", help="open-loop L2 against expert labels")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    common(p)
    p.set_defaults(fn=cmd_eval_open)

    p = sub.add_parser("eval-closed", help="closed-loop episodes and driving score")
    p.add_argument("--suite", choices=("dev", "full"), default="dev")
    p.add_argument("--scenarios", help="explicit scenario kinds (overrides --suite)")
    p.add_argument("--seeds", help="seeds for --scenarios/full suite")
    p.add_argument("--checkpoint")
    p.add_argument("--expert", action="store_true", help="run the scripted expert")
    p.add_argument("--out", required=True)
    common(p)
    p.set_defaults(fn=cmd_eval_closed)

    p = sub.add_parser("report", help="summarize runs and emit plot-data files")
    p.add_argument("--runs", nargs="+", required=True, help="eval-closed outputs")
    p.add_argument("--metrics", nargs="*", help="training metrics logs")
    p.add_argument("--out", required=True, help="output directory")
    common(p)
    p.set_defaults(fn=cmd_report)

    p = sub.add_parser("ablate", help="image-weight grid and module on/off grid")
    p.add_argument("--scenario", default="merge")
    p.add_argument("--seeds", default="0,1")
    p.add_argument("--samples", type=int, default=64)
    p.add_argument("--steps", type=int, default=300)
    p.add_argument("--noise-bound", type=float, default=15.0,
                   help="DS noise bound for the soft directional check")
    p.add_argument("--out", required=True)
    common(p)
    p.set_defaults(fn=cmd_ablate)

    p = sub.add_parser("bench-kernels", help="compare raster kernel backends")
    p.add_argument("--repeats", type=int, default=20)
    p.add_argument("--raster", type=int, default=32)
    p.set_defaults(fn=cmd_bench_kernels)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
