import sys
import time

import numpy as np

from risbc import (
    LearningConfig,
    SystemConfig,
    alloc_oracle,
    baseline_random,
    effective_ris_channel,
    evaluate,
    objective,
    phase_oracle,
    sample_realization,
    train,
)


def desk_cfg(p_max=1.0, minibatch=512, hidden=(128, 64), mode_extra=None, **kw):
    learning = dict(
        minibatch_size=minibatch,
        train_samples=20_000,
        test_samples=2_000,
        phase_hidden=hidden,
        alloc_hidden=(128, 64),
    )
    learning.update(kw.pop("learning", {}))
    return SystemConfig(k_ris=8, m_tags=4, p_max=p_max, learning=LearningConfig(**learning), **kw)


def evaluate_desk(cfg, result, mode="ee", seed=123, n=2000):
    pa_agent, al_agent = result.phase_agent, result.alloc_agent
    h2_agent, h2_oracle = [], []
    ee_agent, ee_oracle = [], []
    obj_phase_agent, obj_alloc_agent, obj_random, obj_joint = [], [], [], []
    for i in range(n):
        chan = sample_realization(cfg, np.random.default_rng([seed, i, 0]))
        rng = np.random.default_rng([seed, i, 1])
        pa = pa_agent.act_on(chan, 0.0, rng)
        h2_agent.append(abs(effective_ris_channel(chan.h_br, chan.h_ru, pa)))
        po = phase_oracle(chan, cfg.phase_levels)
        h2_oracle.append(abs(effective_ris_channel(chan.h_br, chan.h_ru, po)))
        aa = al_agent.act_on(chan, po, 0.0, rng)
        m_agent = evaluate(cfg, chan, po, aa)
        res_o = alloc_oracle(cfg, chan, po, "ee")
        ee_agent.append(m_agent.ee)
        ee_oracle.append(res_o.metrics.ee)
        obj_alloc_agent.append(objective(m_agent, mode))
        res_pa = alloc_oracle(cfg, chan, pa, mode)
        obj_phase_agent.append(res_pa.objective_value)
        aaj = al_agent.act_on(chan, pa, 0.0, rng)
        obj_joint.append(objective(evaluate(cfg, chan, pa, aaj), mode))
        obj_random.append(baseline_random(cfg, chan, rng, mode).objective_value)
    return {
        "h2_ratio": np.mean(h2_agent) / np.mean(h2_oracle),
        "ee_ratio": np.mean(ee_agent) / np.mean(ee_oracle),
        "obj_phase_agent": np.mean(obj_phase_agent),
        "obj_alloc_agent": np.mean(obj_alloc_agent),
        "obj_joint": np.mean(obj_joint),
        "obj_random": np.mean(obj_random),
    }


def report(cfg, mode="ee", seed=42):
    t0 = time.time()
    result = train(cfg, seed=seed, mode=mode)
    t_train = time.time() - t0
    log = result.log
    first = np.mean([r.mean_reward_window for r in log[:2]])
    last = np.mean([r.mean_reward_window for r in log[-2:]])
    t0 = time.time()
    stats = evaluate_desk(cfg, result, mode=mode)
    t_eval = time.time() - t0
    print(
        f"p_max={cfg.p_max} mode={mode} seed={seed}: train {t_train:.0f}s eval {t_eval:.0f}s\n"
        f"  h2_ratio {stats['h2_ratio']:.3f} ee_ratio {stats['ee_ratio']:.3f} "
        f"curve {last/first:.2f} ({first:.3f}->{last:.3f})\n"
        f"  phase/rand {stats['obj_phase_agent']/stats['obj_random']:.2f} "
        f"alloc/rand {stats['obj_alloc_agent']/stats['obj_random']:.2f} "
        f"joint/rand {stats['obj_joint']/stats['obj_random']:.2f}",
        flush=True,
    )
    return result, stats


if __name__ == "__main__":
    which = sys.argv[1] if len(sys.argv) > 1 else "p1ee"
    if which == "p1ee":
        report(desk_cfg(p_max=1.0), mode="ee")
    elif which == "p025se":
        report(desk_cfg(p_max=0.25), mode="se")
    elif which == "p01se":
        report(desk_cfg(p_max=0.1), mode="se")
