import sys
import time

import numpy as np

from risbc import SystemConfig, sample_realization, phase_features, phase_oracle
from risbc.agents import PhaseAgent
from risbc.channel import effective_ris_channel, aligned_phase_bound
from risbc.neural import ReplayBuffer, Transition


def run(n_samples=20_000, hidden=(128, 64), minibatch=128, buffer_cap=4000,
        lr=1e-3, decay=0.5, eps_end=0.05, seed=1, k=8, reward_kind="ratio"):
    cfg = SystemConfig(k_ris=k, m_tags=4)
    ss = np.random.SeedSequence(seed)
    rng_chan, rng_agent, rng_batch = (np.random.default_rng(s) for s in ss.spawn(3))
    agent = PhaseAgent(k, 8, hidden, lr, 1000, rng_agent)
    buf = ReplayBuffer(buffer_cap, 2 * k, action_width=k)
    decay_end = int(decay * n_samples)
    t0 = time.time()
    for i in range(n_samples):
        eps = max(eps_end, 1.0 + (eps_end - 1.0) * i / decay_end)
        chan = sample_realization(cfg, rng_chan)
        pf = phase_features(chan)
        agent.normalizer.observe(pf)
        pa = agent.act(agent.normalizer.transform(pf), eps, rng_agent)
        h2 = abs(effective_ris_channel(chan.h_br, chan.h_ru, pa))
        bound = aligned_phase_bound(chan.h_br, chan.h_ru)
        r = h2 / bound if reward_kind == "ratio" else h2
        buf.push(Transition(pf, pa.levels, r))
        if buf.size >= minibatch:
            feats, actions, rewards = buf.sample(minibatch, rng_batch)
            x = agent.normalizer.transform(feats)
            mask = agent.branch_mask(actions)
            grads, _ = agent.net.backward_mse(x, rewards, mask)
            agent.net.adam_step(grads)
    t_train = time.time() - t0

    # greedy evaluation
    rng_eval = np.random.default_rng(999)
    ratios = []
    for _ in range(500):
        chan = sample_realization(cfg, rng_eval)
        pf = phase_features(chan)
        pa = agent.act(agent.normalizer.transform(pf), 0.0, rng_eval)
        h2 = abs(effective_ris_channel(chan.h_br, chan.h_ru, pa))
        po = phase_oracle(chan, 8)
        h2o = abs(effective_ris_channel(chan.h_br, chan.h_ru, po))
        ratios.append(h2 / h2o)
    return t_train, float(np.mean(ratios))


if __name__ == "__main__":
    args = dict(a.split("=") for a in sys.argv[1:])
    kw = {}
    for key, cast in (("n_samples", int), ("minibatch", int), ("buffer_cap", int),
                      ("lr", float), ("decay", float), ("seed", int), ("k", int),
                      ("eps_end", float), ("reward_kind", str)):
        if key in args:
            kw[key] = cast(args[key])
    if "hidden" in args:
        kw["hidden"] = tuple(int(h) for h in args["hidden"].split(","))
    t, ratio = run(**kw)
    print(f"{sys.argv[1:]}: train {t:.0f}s  h2/oracle ratio {ratio:.3f}", flush=True)
