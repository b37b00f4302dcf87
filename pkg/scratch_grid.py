import sys
import time

import numpy as np

from risbc import LearningConfig, SystemConfig, train
from scratch_train_probe import evaluate_desk


def run(tag, p_max, buffer_capacity, minibatch, hidden, lr=1e-3, decay=0.5, seed=42):
    cfg = SystemConfig(
        k_ris=8, m_tags=4, p_max=p_max,
        learning=LearningConfig(
            learning_rate=lr,
            minibatch_size=minibatch,
            buffer_capacity=buffer_capacity,
            train_samples=20_000,
            test_samples=2_000,
            epsilon_decay_fraction=decay,
            phase_hidden=hidden,
            alloc_hidden=(128, 64),
        ),
    )
    t0 = time.time()
    result = train(cfg, seed=seed, mode="ee")
    t_train = time.time() - t0
    log = result.log
    first = np.mean([r.mean_reward_window for r in log[:2]])
    last = np.mean([r.mean_reward_window for r in log[-2:]])
    stats = evaluate_desk(cfg, result, n=800)
    print(
        f"{tag}: train {t_train:.0f}s h2_ratio {stats['h2_ratio']:.3f} "
        f"ee_ratio {stats['ee_ratio']:.3f} curve {last/first:.2f} "
        f"phase/rand {stats['obj_phase_agent']/stats['obj_random']:.2f} "
        f"alloc/rand {stats['obj_alloc_agent']/stats['obj_random']:.2f}",
        flush=True,
    )


if __name__ == "__main__":
    which = sys.argv[1]
    if which == "a":
        run("a p=0.1 buf=50k mb=128 h=128,64", 0.1, 50_000, 128, (128, 64))
    elif which == "b":
        run("b p=0.1 buf=4k mb=128 h=128,64", 0.1, 4_000, 128, (128, 64))
    elif which == "c":
        run("c p=1.0 buf=4k mb=128 h=128,64", 1.0, 4_000, 128, (128, 64))
    elif which == "d":
        run("d p=0.1 buf=4k mb=256 h=256,128", 0.1, 4_000, 256, (256, 128))
