"""Command-line front end: reproducible experiments emitting CSV/JSON
artifacts.

Subcommands: theory, wigner, simulate, run, images, eval.  Every command is a
pure function of (config, seed) to bytes on disk; CSV files carry a header
row plus a comment line recording the config hash, and floats print with 17
significant digits so they round-trip exactly.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import graphs, imaging, pipeline, spectral, wigner as wig
from .so3 import FrameSet, sample_uniform

_CONFIG_FIELDS = {
    "seed",
    "n_frames",
    "cos_threshold",
    "p_values",
    "k_max",
    "knn_k",
    "snr_values",
    "image_size",
    "output_dir",
}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    seed: int = 0
    n_frames: int = 2000
    cos_threshold: float = 0.95
    p_values: tuple = (1.0,)
    k_max: int = 10
    knn_k: int = 50
    snr_values: tuple = ()
    image_size: int = 65
    output_dir: str = "out"

    def __post_init__(self):
        if self.seed < 0:
            raise ConfigError("seed must be a non-negative integer")
        if self.n_frames < 2:
            raise ConfigError("n_frames must be >= 2")
        if not -1.0 < self.cos_threshold < 1.0:
            raise ConfigError("cos_threshold must lie in (-1, 1)")
        if any(not 0.0 <= p <= 1.0 for p in self.p_values):
            raise ConfigError("p_values must lie in [0, 1]")
        if self.k_max < 1:
            raise ConfigError("k_max must be >= 1")
        if not 1 <= self.knn_k < self.n_frames:
            raise ConfigError("knn_k must satisfy 1 <= knn_k < n_frames")
        if any(s <= 0 for s in self.snr_values):
            raise ConfigError("snr_values must be positive")
        if self.image_size % 2 == 0 or self.image_size < 3:
            raise ConfigError("image_size must be odd and >= 3")
        object.__setattr__(self, "p_values", tuple(float(p) for p in self.p_values))
        object.__setattr__(self, "snr_values", tuple(float(s) for s in self.snr_values))

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            raw = json.load(fh)
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(raw) - _CONFIG_FIELDS
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**raw)

    def hash(self) -> str:
        payload = json.dumps(asdict(self), sort_keys=True).encode()
        return hashlib.sha256(payload).hexdigest()[:16]


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _out_dir(args, config: ExperimentConfig | None) -> Path:
    if getattr(args, "out", None):
        d = Path(args.out)
    elif os.environ.get("MFCA_OUT"):
        d = Path(os.environ["MFCA_OUT"])
    elif config is not None:
        d = Path(config.output_dir)
    else:
        d = Path("out")
    d.mkdir(parents=True, exist_ok=True)
    return d


def _load_config(args) -> ExperimentConfig:
    if getattr(args, "config", None):
        cfg = ExperimentConfig.from_json(args.config)
    else:
        cfg = ExperimentConfig()
    if getattr(args, "seed", None) is not None:
        cfg = ExperimentConfig(**{**asdict(cfg), "seed": args.seed})
    return cfg


def _parse_h_spec(spec: str) -> list:
    """Either a comma list '0.1,0.5' or a range 'start:step:stop'."""
    if ":" in spec:
        start, step, stop = (float(x) for x in spec.split(":"))
        if step <= 0 or stop < start:
            raise ValueError("invalid h range")
        n = int(round((stop - start) / step)) + 1
        return [start + i * step for i in range(n) if start + i * step <= stop + 1e-12]
    return [float(x) for x in spec.split(",") if x]


def cmd_theory(args) -> int:
    ks = [int(x) for x in args.k.split(",") if x]
    hs = _parse_h_spec(args.h)
    if not ks or not hs:
        raise SystemExit(2)
    cfg = _load_config(args)
    out = _out_dir(args, cfg)
    tag = f"# config={cfg.hash()}\n"
    with open(out / "eigenvalues.csv", "w") as fh:
        fh.write("k,h,n,lambda,multiplicity\n")
        fh.write(tag)
        for k in ks:
            for h in hs:
                table = spectral.eigenvalue_table(k, h, k + args.n_extra)
                for n, lam, mult in table.values:
                    fh.write(f"{k},{_fmt(h)},{n},{_fmt(lam)},{mult}\n")
    with open(out / "gaps.csv", "w") as fh:
        fh.write("k,h,gap,delta_k\n")
        fh.write(tag)
        for k in ks:
            for h in hs:
                fh.write(
                    f"{k},{_fmt(h)},{_fmt(spectral.spectral_gap(k, h))},"
                    f"{_fmt(spectral.delta_k(k))}\n"
                )
    return 0


def cmd_wigner(args) -> int:
    if args.euler is not None:
        phi, theta, psi = (float(x) for x in args.euler.split(","))
        from .so3 import from_euler

        val = wig.wigner_D(args.ell, args.m, args.n, from_euler(phi, theta, psi))
        print(f"{_fmt(val.real)}{val.imag:+.17g}j")
    else:
        val = wig.wigner_d(args.ell, args.m, args.n, args.theta)
        print(_fmt(val))
    return 0


def cmd_simulate(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(args, cfg)
    frames = sample_uniform(cfg.seed, cfg.n_frames)
    with open(out / "frames.csv", "w") as fh:
        frames.write_csv(fh)
        fh.write(f"# config={cfg.hash()}\n")
    clean = graphs.clean_graph(frames, cfg.cos_threshold)
    for p in cfg.p_values:
        g = clean if p == 1.0 else graphs.rewire(clean, p, cfg.seed + 1)
        path = out / f"graph_p{p:g}.csv"
        g.to_csv(path)
        with open(path, "a") as fh:
            fh.write(f"# config={cfg.hash()}\n")
    return 0


def _run_pipeline(frames: FrameSet, graph, cfg: ExperimentConfig, out: Path, threads: int):
    tag = f"# config={cfg.hash()}\n"
    ks = list(range(1, cfg.k_max + 1))
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        blocks = list(pool.map(lambda k: pipeline.embed(graph, k), ks))
    for k, block in zip(ks, blocks):
        spec_vals = block.eigenvalues
        with open(out / f"spectrum_k{k}.csv", "w") as fh:
            fh.write("rank,eigenvalue\n")
            fh.write(tag)
            for r, v in enumerate(spec_vals):
                fh.write(f"{r},{_fmt(v)}\n")
        pts = pipeline.scatter_data(
            block, frames, min(10000, block.n * (block.n - 1) // 2), cfg.seed + 2
        )
        with open(out / f"scatter_k{k}.csv", "w") as fh:
            fh.write("affinity,target\n")
            fh.write(tag)
            for a, t in pts:
                fh.write(f"{_fmt(a)},{_fmt(t)}\n")

    mats = {k: pipeline.affinity_matrix(b) for k, b in zip(ks, blocks)}
    iso = blocks[0].isolated
    methods = {}
    for k in (1, 5, 10):
        if k in mats:
            methods[f"A^({k})"] = mats[k]
    methods["A^All"] = np.prod(np.array([mats[k] for k in ks]), axis=0)

    metrics = {}
    dirs = frames.viewing_directions()
    for name, a in methods.items():
        nb = pipeline.knn(a, cfg.knn_k, iso)
        metrics[name] = pipeline.evaluate_neighbors(frames, nb)
        if name == "A^All":
            with open(out / "neighbors.csv", "w") as fh:
                fh.write("i,rank,j,affinity,true_angle_deg\n")
                fh.write(tag)
                for i in range(nb.shape[0]):
                    for r, j in enumerate(nb[i]):
                        ang = np.degrees(
                            np.arccos(np.clip(dirs[i] @ dirs[j], -1.0, 1.0))
                        )
                        fh.write(f"{i},{r},{j},{_fmt(a[i, j])},{_fmt(ang)}\n")
    with open(out / "metrics.json", "w") as fh:
        json.dump({"config": cfg.hash(), "methods": metrics}, fh, indent=1)


def cmd_run(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(args, cfg)
    frames = FrameSet.from_csv(args.frames)
    graph = graphs.ObservationGraph.from_csv(args.graph, n_vertices=len(frames))
    _run_pipeline(frames, graph, cfg, out, args.threads)
    return 0


def cmd_images(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(args, cfg)
    frames = sample_uniform(cfg.seed, cfg.n_frames)
    with open(out / "frames.csv", "w") as fh:
        frames.write_csv(fh)
        fh.write(f"# config={cfg.hash()}\n")
    phantom = imaging.default_phantom()
    clean = [
        imaging.project(phantom, r, L=cfg.image_size) for r in frames.frames
    ]
    clean_frac = graphs.clean_graph(frames, cfg.cos_threshold).n_edges / (
        cfg.n_frames * (cfg.n_frames - 1) / 2
    )
    snrs = cfg.snr_values or (float("inf"),)
    for snr in snrs:
        if np.isinf(snr):
            imgs, label = clean, "inf"
        else:
            imgs = [
                imaging.add_noise(img, snr, cfg.seed + 10 + idx)
                for idx, img in enumerate(clean)
            ]
            label = f"{snr:g}"
        imaging.save_images(out / f"images_snr{label}.bin", imgs)
        with open(out / f"images_snr{label}.csv", "w") as fh:
            fh.write("index,seed,snr\n")
            fh.write(f"# config={cfg.hash()}\n")
            for idx in range(len(imgs)):
                fh.write(f"{idx},{cfg.seed + 10 + idx},{label}\n")
        g = imaging.image_graph(imgs, edge_fraction=clean_frac)
        g.to_csv(out / f"image_graph_snr{label}.csv")
        sub = out / f"snr{label}"
        sub.mkdir(exist_ok=True)
        _run_pipeline(frames, g, cfg, sub, args.threads)
    return 0


def cmd_eval(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(args, cfg)
    frames = FrameSet.from_csv(args.frames)
    rows = np.loadtxt(args.neighbors, delimiter=",", skiprows=1, ndmin=2)
    n = int(rows[:, 0].max()) + 1
    K = int(rows[:, 1].max()) + 1
    nb = np.zeros((n, K), dtype=np.int64)
    nb[rows[:, 0].astype(int), rows[:, 1].astype(int)] = rows[:, 2].astype(int)
    metrics = pipeline.evaluate_neighbors(frames, nb)
    with open(out / "metrics.json", "w") as fh:
        json.dump({"config": cfg.hash(), "methods": {"input": metrics}}, fh, indent=1)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mfca")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON experiment config")
        p.add_argument("--seed", type=int, default=None, help="override config seed")
        p.add_argument("--out", help="output directory (fallback: $MFCA_OUT)")
        p.add_argument("--threads", type=int, default=4)

    p = sub.add_parser("theory", help="emit eigenvalue tables and spectral gaps")
    common(p)
    p.add_argument("--k", required=True, help="comma list of frequencies")
    p.add_argument("--h", required=True, help="comma list or start:step:stop")
    p.add_argument("--n-extra", type=int, default=10, help="rows above n=k per table")
    p.set_defaults(func=cmd_theory)

    p = sub.add_parser("wigner", help="evaluate a single d- or D-matrix entry")
    common(p)
    p.add_argument("--ell", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--theta", type=float, default=0.0)
    p.add_argument("--euler", help="phi,theta,psi for a full D entry")
    p.set_defaults(func=cmd_wigner)

    p = sub.add_parser("simulate", help="sample frames and write per-p graphs")
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("run", help="run the pipeline on a frames+graph pair")
    common(p)
    p.add_argument("--frames", required=True)
    p.add_argument("--graph", required=True)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("images", help="phantom projections, image graph, pipeline")
    common(p)
    p.set_defaults(func=cmd_images)

    p = sub.add_parser("eval", help="evaluate a neighbors.csv against frames")
    common(p)
    p.add_argument("--frames", required=True)
    p.add_argument("--neighbors", required=True)
    p.set_defaults(func=cmd_eval)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except SystemExit:
        raise
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
