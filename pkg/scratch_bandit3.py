import sys
import time

import numpy as np

from risbc import SystemConfig, sample_realization, phase_features, phase_oracle
from risbc.agents import FeatureNormalizer
from risbc.neural import Mlp, ReplayBuffer, Transition
from scratch_bandit2 import cartesian, K, L, table


def run(n_samples, hidden, minibatch, buffer_cap, lr, decay, eps_end, seed,
        canonical=True, feats="cartesian", zero_head=True):
    cfg = SystemConfig(k_ris=K, m_tags=4)
    ss = np.random.SeedSequence(seed)
    rng_chan, rng_agent, rng_batch = (np.random.default_rng(s) for s in ss.spawn(3))
    net = Mlp([2 * K, *hidden, K * L], rng_agent, lr)
    if zero_head:
        net.weights[-1][:] = 0.0
        net.biases[-1][:] = 0.0
    norm = FeatureNormalizer(2 * K, 1000)
    buf = ReplayBuffer(buffer_cap, 2 * K, action_width=K)
    offsets = np.arange(K, dtype=np.int64) * L
    decay_end = int(decay * n_samples)
    t0 = time.time()
    for i in range(n_samples):
        eps = max(eps_end, 1.0 + (eps_end - 1.0) * i / max(1, decay_end))
        chan = sample_realization(cfg, rng_chan)
        pf = phase_features(chan)
        if feats == "cartesian":
            pf = cartesian(pf)
        norm.observe(pf)
        q = net.forward(norm.transform(pf)).reshape(K, L)
        greedy = q.argmax(axis=1)
        explore = rng_agent.random(K) < eps
        rnd = rng_agent.integers(0, L, size=K)
        levels = np.where(explore, rnd, greedy)
        c = chan.h_br * chan.h_ru
        r = abs((c * table[levels]).sum()) / np.abs(c).sum()
        store = (levels - levels[0]) % L if canonical else levels
        buf.push(Transition(pf, store, r))
        if buf.size >= minibatch:
            fb, ab, rb = buf.sample(minibatch, rng_batch)
            grads, _ = net.backward_mse(norm.transform(fb), rb, ab + offsets)
            net.adam_step(grads)
        if (i + 1) % 5000 == 0:
            rng_e = np.random.default_rng(999)
            ratios = []
            for _ in range(300):
                ch2 = sample_realization(cfg, rng_e)
                pf2 = phase_features(ch2)
                if feats == "cartesian":
                    pf2 = cartesian(pf2)
                q2 = net.forward(norm.transform(pf2)).reshape(K, L)
                lv = q2.argmax(axis=1)
                c2 = ch2.h_br * ch2.h_ru
                po = phase_oracle(ch2, L)
                h2o = abs((c2 * table[po.levels]).sum())
                ratios.append(abs((c2 * table[lv]).sum()) / h2o)
            print(f"  sample {i+1}: eps {eps:.2f} greedy/oracle {np.mean(ratios):.3f} "
                  f"({time.time()-t0:.0f}s)", flush=True)


if __name__ == "__main__":
    name = sys.argv[1]
    if name == "lr1e-4":
        print("canonical cartesian lr=1e-4 mb=512 decay=0.5:")
        run(20_000, (128, 64), 512, 4000, 1e-4, 0.5, 0.05, 1)
    elif name == "lr3e-4":
        print("canonical cartesian lr=3e-4 mb=512 decay=0.5:")
        run(20_000, (128, 64), 512, 4000, 3e-4, 0.5, 0.05, 1)
    elif name == "lr1e-4-nocanon":
        print("plain cartesian lr=1e-4 mb=512 decay=0.5:")
        run(20_000, (128, 64), 512, 4000, 1e-4, 0.5, 0.05, 1, canonical=False)
