#!/usr/bin/env python3
"""Full-scale smoke run: ~2748 elements, null at 2.5 degrees.

Budget (laptop-class CPU, single thread):
  - field vectors / quadrature:      ~1 minute
  - dataset, 20 chains x 4000 steps: ~10 minutes
  - network training (256x3, 200 epochs on 80000 samples): multi-hour
  - guided + baseline chains:        ~10 minutes
Pass ``--epochs N`` to shrink the training budget for a faster, rougher run.

On completion the script checks the qualitative curve ordering: the plain
annealer is lowest on the theoretical pattern, its weights re-scored on the
true pattern sit above the guided chain's true gains, and the predicted
trajectory stays near the logged true trajectory.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

REPO = Path(__file__).resolve().parent.parent

from rimnull import residual_net as rn  # noqa: E402
from rimnull.config import load_config  # noqa: E402
from rimnull.resnet_sa import (MismatchScenario, generate_dataset,  # noqa: E402
                               resnet_sa_optimize, write_experiment_csv)
from rimnull.weights import SAConfig  # noqa: E402


def run(epochs_override: int | None = None) -> int:
    cfg = load_config(REPO / "configs" / "fullscale.ini")
    if epochs_override is not None:
        cfg.net.epochs = epochs_override
    out = REPO / "results" / "fullscale"
    out.mkdir(parents=True, exist_ok=True)

    scenario = MismatchScenario(geometry=cfg.build_geometry(),
                                theoretical_feed=cfg.theoretical_feed(),
                                true_feed=cfg.true_feed(),
                                target=cfg.target_direction())
    print(f"geometry: {scenario.geometry.n_elements} elements")

    ds_cfg = SAConfig(iterations=cfg.dataset.iterations,
                      schedule_length=cfg.dataset.schedule_length,
                      rng_seed=cfg.dataset.seed, m_levels=cfg.sa.m_levels)
    print("generating dataset ...")
    samples = generate_dataset(scenario, ds_cfg, cfg.dataset.trajectories)
    rn.write_dataset_csv(out / "dataset.csv", samples)
    print(f"dataset: {len(samples)} samples")

    net = rn.ResidualNetwork.create(scenario.geometry.n_elements,
                                    width=cfg.net.width,
                                    n_blocks=cfg.net.blocks,
                                    include_gain_feature=cfg.net.include_gain_feature,
                                    rng_seed=cfg.net.init_seed)
    print(f"training ({cfg.net.epochs} epochs) ...")
    net, history = rn.train(net, samples,
                            rn.TrainConfig(epochs=cfg.net.epochs,
                                           batch_size=cfg.net.batch_size,
                                           learning_rate=cfg.net.learning_rate,
                                           decay=cfg.net.lr_decay,
                                           weight_decay=cfg.net.weight_decay,
                                           rng_seed=cfg.net.train_seed))
    rn.save_model(net, out / "model.npz")
    print(f"validation MSE {history[-1]:.4f} dB^2")

    sa_cfg = SAConfig(iterations=cfg.sa.iterations,
                      schedule_length=cfg.sa.schedule_length,
                      rng_seed=cfg.sa.seed, m_levels=cfg.sa.m_levels)
    res = resnet_sa_optimize(scenario, net, sa_cfg)
    write_experiment_csv(out / "resnet_sa_chain.csv",
                         res.resnet_sa_theoretical_trajectory,
                         res.resnet_sa_true_trajectory,
                         res.resnet_sa_predicted_trajectory,
                         res.resnet_sa_accepted)
    write_experiment_csv(out / "sa_baseline_chain.csv",
                         res.sa_theoretical_trajectory,
                         res.sa_on_true_trajectory,
                         res.sa_theoretical_trajectory,
                         res.sa_accepted)

    q = 3 * sa_cfg.iterations // 4
    theo_final = float(res.sa_theoretical_trajectory[-1])
    baseline_true = float(res.sa_on_true_trajectory[-1])
    guided_true = float(res.resnet_sa_true_trajectory[-1])
    track_rms = float(np.sqrt(np.mean(
        (res.resnet_sa_predicted_trajectory[q:]
         - res.resnet_sa_true_trajectory[q:]) ** 2)))
    ordering = {
        "theoretical_sa_final_db": theo_final,
        "baseline_on_true_final_db": baseline_true,
        "guided_true_final_db": guided_true,
        "tracking_rms_final_quartile_db": track_rms,
        "theoretical_lowest": theo_final <= min(baseline_true, guided_true),
        "guided_below_baseline": guided_true < baseline_true,
        "predicted_tracks_true": track_rms < 3.0,
    }
    (out / "smoke_summary.json").write_text(json.dumps(ordering, indent=2) + "\n")
    print(json.dumps(ordering, indent=2))
    ok = (ordering["theoretical_lowest"] and ordering["guided_below_baseline"]
          and ordering["predicted_tracks_true"])
    print("smoke:", "PASS" if ok else "FAIL")
    return 0 if ok else 1


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--epochs", type=int, default=None,
                    help="override training epochs to shrink the budget")
    args = ap.parse_args()
    sys.exit(run(args.epochs))
