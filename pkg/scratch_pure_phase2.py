import sys
import time

import numpy as np

from risbc import SystemConfig, sample_realization, phase_features, phase_oracle
from risbc.agents import PhaseAgent
from risbc.channel import effective_ris_channel, aligned_phase_bound
from risbc.neural import ReplayBuffer, Transition


def greedy_ratio(agent, cfg, n=200):
    rng_eval = np.random.default_rng(999)
    ratios = []
    for _ in range(n):
        chan = sample_realization(cfg, rng_eval)
        pf = phase_features(chan)
        pa = agent.act(agent.normalizer.transform(pf), 0.0, rng_eval)
        h2 = abs(effective_ris_channel(chan.h_br, chan.h_ru, pa))
        po = phase_oracle(chan, cfg.phase_levels)
        h2o = abs(effective_ris_channel(chan.h_br, chan.h_ru, po))
        ratios.append(h2 / h2o)
    return float(np.mean(ratios))


def run(n_samples, hidden, minibatch, buffer_cap, lr, decay, eps_end, seed, k):
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
        r = h2 / aligned_phase_bound(chan.h_br, chan.h_ru)
        buf.push(Transition(pf, pa.levels, r))
        if buf.size >= minibatch:
            feats, actions, rewards = buf.sample(minibatch, rng_batch)
            x = agent.normalizer.transform(feats)
            grads, _ = agent.net.backward_mse(x, rewards, agent.branch_mask(actions))
            agent.net.adam_step(grads)
        if (i + 1) % 10_000 == 0:
            print(f"  sample {i+1}: eps {eps:.2f} greedy ratio {greedy_ratio(agent, cfg):.3f} "
                  f"({time.time()-t0:.0f}s)", flush=True)
    return agent


if __name__ == "__main__":
    run(n_samples=100_000, hidden=(128, 64), minibatch=128, buffer_cap=4000,
        lr=1e-3, decay=0.5, eps_end=0.05, seed=1, k=8)
