"""Configuration-driven pipeline runner.

Subcommands mirror the pipeline stages: ``geometry`` (tiling summary),
``pattern`` (gain sweep CSV), ``sa`` (annealing on the theoretical pattern),
``dataset`` (training-sample generation), ``train`` (residual network fit),
``resnet-sa`` (network-guided annealing plus baseline), and ``full`` (all of
the above in sequence). Every output file embeds the config hash and the seeds
that produced it as ``#`` header comments.

Exit codes: 0 success, 2 configuration/usage error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import residual_net as rn
from .config import (ConfigError, ExperimentConfig, config_hash,
                     describe_defaults, load_config, serialize_config)
from .geometry import GeometryError
from .pofield import QuadratureError, pattern_sweep
from .resnet_sa import (MismatchScenario, evaluate_null_depth, generate_dataset,
                        resnet_sa_optimize, write_experiment_csv)
from .weights import SAConfig, WeightVector, sa_optimize, write_trajectory_csv

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _scenario(cfg: ExperimentConfig) -> MismatchScenario:
    return MismatchScenario(
        geometry=cfg.build_geometry(),
        theoretical_feed=cfg.theoretical_feed(),
        true_feed=cfg.true_feed(),
        target=cfg.target_direction(),
        samples_per_wavelength=cfg.quadrature.samples_per_wavelength,
    )


def _headers(cfg: ExperimentConfig, **extra) -> list[str]:
    lines = [f"config_hash={config_hash(cfg)}"]
    lines += [f"{k}={v}" for k, v in extra.items()]
    return lines


def _write_text(path, text: str) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(text)


def _load_weights(arg: str, n: int, m_levels: int) -> WeightVector:
    """Weights from 'uniform' or a file holding a base-M string."""
    if arg == "uniform":
        return WeightVector.uniform(n, m_levels)
    text = Path(arg).read_text().strip()
    w = WeightVector.from_base_m_string(text, m_levels)
    if w.n != n:
        raise ConfigError(
            f"weights file {arg} holds {w.n} elements, geometry has {n}")
    return w


def cmd_geometry(cfg: ExperimentConfig, args) -> int:
    geom = cfg.build_geometry()
    info = {
        "config_hash": config_hash(cfg),
        "n_elements": geom.n_elements,
        "element_side_m": geom.element_side_m,
        "n_rings": max(s.ring_index for s in geom.elements) + 1,
        "focal_length_m": geom.focal_length_m,
        "wavelength_m": geom.wavelength_m,
        "theta0_deg": math.degrees(geom.theta0_rad),
        "theta1_deg": math.degrees(geom.theta1_rad),
    }
    text = json.dumps(info, indent=2) + "\n"
    if args.output:
        _write_text(args.output, text)
    sys.stdout.write(text)
    return EXIT_OK


def _psi_grid(cfg: ExperimentConfig) -> np.ndarray:
    p = cfg.pattern
    n = int(round((p.psi_max_deg - p.psi_min_deg) / p.psi_step_deg)) + 1
    return np.radians(np.linspace(p.psi_min_deg, p.psi_max_deg, n))


def cmd_pattern(cfg: ExperimentConfig, args) -> int:
    geom = cfg.build_geometry()
    feed = cfg.true_feed() if args.which == "true" else cfg.theoretical_feed()
    w = _load_weights(args.weights, geom.n_elements, cfg.sa.m_levels)
    grid = _psi_grid(cfg)
    table = pattern_sweep(geom, feed, w.values(), grid,
                          math.radians(cfg.pattern.phi_deg),
                          cfg.quadrature.samples_per_wavelength)
    lines = [f"# {h}" for h in _headers(cfg, which=args.which,
                                        weights=args.weights)]
    lines.append("psi_deg,gain_dbi")
    for psi, g in table:
        lines.append(f"{math.degrees(psi):.10g},{g:.10g}")
    _write_text(args.output, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_sa(cfg: ExperimentConfig, args) -> int:
    sc = _scenario(cfg)
    sa_cfg = SAConfig(iterations=cfg.sa.iterations,
                      schedule_length=cfg.sa.schedule_length,
                      rng_seed=cfg.sa.seed, m_levels=cfg.sa.m_levels)
    best, traj = sa_optimize(sc.geometry.n_elements, sa_cfg,
                             sc.theoretical_gain)
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    write_trajectory_csv(out / "sa_trajectory.csv", traj,
                         _headers(cfg, seed=cfg.sa.seed, objective="G_db"))
    final = traj.weights_at(len(traj) - 1)
    _write_text(out / "final_weights.txt", final.to_base_m_string() + "\n")
    g_th, g_true = evaluate_null_depth(sc, final)
    summary = {"config_hash": config_hash(cfg), "seed": cfg.sa.seed,
               "final_theoretical_gain_db": g_th,
               "final_true_gain_db": g_true,
               "best_theoretical_gain_db": traj.best_objective}
    _write_text(out / "sa_summary.json", json.dumps(summary, indent=2) + "\n")
    print(f"final null: theoretical {g_th:.2f} dBi, true {g_true:.2f} dBi")
    return EXIT_OK


def cmd_dataset(cfg: ExperimentConfig, args) -> int:
    sc = _scenario(cfg)
    ds_cfg = SAConfig(iterations=cfg.dataset.iterations,
                      schedule_length=cfg.dataset.schedule_length,
                      rng_seed=cfg.dataset.seed, m_levels=cfg.sa.m_levels)
    samples = generate_dataset(sc, ds_cfg, cfg.dataset.trajectories,
                               cfg.dataset.noise_sigma_db)
    Path(args.output).parent.mkdir(parents=True, exist_ok=True)
    rn.write_dataset_csv(args.output, samples,
                         _headers(cfg, seed=cfg.dataset.seed,
                                  trajectories=cfg.dataset.trajectories))
    print(f"wrote {len(samples)} samples to {args.output}")
    return EXIT_OK


def _train(cfg: ExperimentConfig, samples) -> rn.ResidualNetwork:
    geom_n = cfg.build_geometry().n_elements
    net = rn.ResidualNetwork.create(geom_n, width=cfg.net.width,
                                    n_blocks=cfg.net.blocks,
                                    include_gain_feature=cfg.net.include_gain_feature,
                                    rng_seed=cfg.net.init_seed)
    train_cfg = rn.TrainConfig(epochs=cfg.net.epochs,
                               batch_size=cfg.net.batch_size,
                               learning_rate=cfg.net.learning_rate,
                               decay=cfg.net.lr_decay,
                               weight_decay=cfg.net.weight_decay,
                               rng_seed=cfg.net.train_seed,
                               split_fraction=cfg.net.split_fraction)
    net, history = rn.train(net, samples, train_cfg)
    return net, history


def cmd_train(cfg: ExperimentConfig, args) -> int:
    samples = rn.read_dataset_csv(args.dataset, cfg.sa.m_levels)
    net, history = _train(cfg, samples)
    Path(args.output).parent.mkdir(parents=True, exist_ok=True)
    rn.save_model(net, args.output)
    print(f"trained on {len(samples)} samples, "
          f"final validation MSE {history[-1]:.4f} dB^2")
    return EXIT_OK


def _run_resnet_sa(cfg: ExperimentConfig, net: rn.ResidualNetwork, out: Path):
    sc = _scenario(cfg)
    sa_cfg = SAConfig(iterations=cfg.sa.iterations,
                      schedule_length=cfg.sa.schedule_length,
                      rng_seed=cfg.sa.seed, m_levels=cfg.sa.m_levels)
    res = resnet_sa_optimize(sc, net, sa_cfg)
    out.mkdir(parents=True, exist_ok=True)
    hdr = _headers(cfg, seed=cfg.sa.seed)
    write_experiment_csv(out / "resnet_sa_chain.csv",
                         res.resnet_sa_theoretical_trajectory,
                         res.resnet_sa_true_trajectory,
                         res.resnet_sa_predicted_trajectory,
                         res.resnet_sa_accepted, hdr)
    write_experiment_csv(out / "sa_baseline_chain.csv",
                         res.sa_theoretical_trajectory,
                         res.sa_on_true_trajectory,
                         res.sa_theoretical_trajectory,  # no NN: prediction = G
                         res.sa_accepted, hdr)
    _write_text(out / "resnet_sa_final_weights.txt",
                res.resnet_sa_final_weights.to_base_m_string() + "\n")
    _write_text(out / "sa_final_weights.txt",
                res.sa_final_weights.to_base_m_string() + "\n")
    summary = {
        "config_hash": config_hash(cfg),
        "seeds": {"sa": cfg.sa.seed, "dataset": cfg.dataset.seed,
                  "net_init": cfg.net.init_seed,
                  "net_train": cfg.net.train_seed},
        "target_psi_deg": cfg.target.psi_deg,
        "target_phi_deg": cfg.target.phi_deg,
        "n_elements": sc.geometry.n_elements,
        "dataset_size": cfg.dataset.trajectories * cfg.dataset.iterations,
        "sa_final_true_gain_db": float(res.sa_on_true_trajectory[-1]),
        "resnet_sa_final_true_gain_db": float(res.resnet_sa_true_trajectory[-1]),
        "improvement_db": float(res.sa_on_true_trajectory[-1]
                                - res.resnet_sa_true_trajectory[-1]),
    }
    _write_text(out / "summary.json", json.dumps(summary, indent=2) + "\n")
    return summary


def cmd_resnet_sa(cfg: ExperimentConfig, args) -> int:
    net = rn.load_model(args.model)
    summary = _run_resnet_sa(cfg, net, Path(args.output))
    print(f"true null: baseline {summary['sa_final_true_gain_db']:.2f} dBi, "
          f"guided {summary['resnet_sa_final_true_gain_db']:.2f} dBi "
          f"(improvement {summary['improvement_db']:.2f} dB)")
    return EXIT_OK


def cmd_full(cfg: ExperimentConfig, args) -> int:
    out = Path(args.output or cfg.output.directory)
    stage = "dataset"
    try:
        sc = _scenario(cfg)
        ds_cfg = SAConfig(iterations=cfg.dataset.iterations,
                          schedule_length=cfg.dataset.schedule_length,
                          rng_seed=cfg.dataset.seed, m_levels=cfg.sa.m_levels)
        samples = generate_dataset(sc, ds_cfg, cfg.dataset.trajectories,
                                   cfg.dataset.noise_sigma_db)
        out.mkdir(parents=True, exist_ok=True)
        rn.write_dataset_csv(out / "dataset.csv", samples,
                             _headers(cfg, seed=cfg.dataset.seed,
                                      trajectories=cfg.dataset.trajectories))
        stage = "train"
        net, history = _train(cfg, samples)
        rn.save_model(net, out / "model.npz")
        stage = "resnet-sa"
        summary = _run_resnet_sa(cfg, net, out)
        summary["validation_mse_db2"] = float(history[-1])
        summary["config"] = serialize_config(cfg)
        _write_text(out / "summary.json", json.dumps(summary, indent=2) + "\n")
    except Exception as exc:
        print(f"stage '{stage}' failed: {exc}", file=sys.stderr)
        raise
    print(f"experiment complete: improvement {summary['improvement_db']:.2f} dB, "
          f"outputs in {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rimnull",
        description="Rim-reconfigurable reflector nulling pipeline.",
        epilog="Config keys (INI sections), defaults and units:\n"
               + describe_defaults(),
        formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--threads", type=int, default=1,
                        help="worker threads; 1 (default) is the canonical "
                             "bitwise-reproducible mode")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("-c", "--config", help="experiment INI file "
                       "(defaults apply when omitted)")
        p.set_defaults(fn=fn)
        return p

    p = add("geometry", cmd_geometry, "print the rim-element tiling summary")
    p.add_argument("-o", "--output", help="optional JSON output path")

    p = add("pattern", cmd_pattern, "gain-vs-angle sweep CSV")
    p.add_argument("--which", choices=["theoretical", "true"],
                   default="theoretical")
    p.add_argument("--weights", default="uniform",
                   help="'uniform' or a file holding a base-M weight string")
    p.add_argument("-o", "--output", required=True)

    p = add("sa", cmd_sa, "anneal on the theoretical pattern")
    p.add_argument("-o", "--output", required=True, help="output directory")

    p = add("dataset", cmd_dataset, "generate training samples")
    p.add_argument("-o", "--output", required=True, help="CSV path")

    p = add("train", cmd_train, "fit the residual network")
    p.add_argument("-i", "--dataset", required=True, help="dataset CSV")
    p.add_argument("-o", "--output", required=True, help="model file path")

    p = add("resnet-sa", cmd_resnet_sa, "network-guided annealing + baseline")
    p.add_argument("-m", "--model", required=True, help="trained model file")
    p.add_argument("-o", "--output", required=True, help="output directory")

    p = add("full", cmd_full, "dataset -> train -> resnet-sa in one run")
    p.add_argument("-o", "--output", help="output directory "
                   "(default: [output] directory from the config)")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads < 1:
        parser.error("--threads must be >= 1")
    try:
        cfg = load_config(args.config) if args.config else ExperimentConfig()
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.fn(cfg, args)
    except (ConfigError, GeometryError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (QuadratureError, rn.TrainingDivergedError, FloatingPointError,
            ValueError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
