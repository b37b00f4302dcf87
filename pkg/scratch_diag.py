import numpy as np

from risbc import SystemConfig, sample_realization, phase_features
from risbc.agents import PhaseAgent
from risbc.channel import effective_ris_channel, aligned_phase_bound
from risbc.neural import Mlp, ReplayBuffer, Transition

K, L = 8, 8
cfg = SystemConfig(k_ris=K, m_tags=4)
table = np.exp(1j * 2 * np.pi * np.arange(L) / L)


def ideal_targets(chan):
    """64-vector of |h2|/bound when branch k picks level l and others sit at 0."""
    c = chan.h_br * chan.h_ru
    bound = np.abs(c).sum()
    out = np.empty(K * L)
    total0 = c.sum()
    for k in range(K):
        others = total0 - c[k]
        out[k * L:(k + 1) * L] = np.abs(others + c[k] * table) / bound
    return out


def best_response_match(agent, n=300):
    rng = np.random.default_rng(999)
    hits = 0
    tot = 0
    for _ in range(n):
        chan = sample_realization(cfg, rng)
        pf = phase_features(chan)
        q = agent.net.forward(agent.normalizer.transform(pf)).reshape(K, L)
        tgt = ideal_targets(chan).reshape(K, L)
        hits += (q.argmax(axis=1) == tgt.argmax(axis=1)).sum()
        tot += K
    return hits / tot


# --- Part 1: supervised fit of the ideal (others-at-zero) target ---
rng = np.random.default_rng(0)
agent = PhaseAgent(K, L, (128, 64), 1e-3, 1000, rng)
agent.net.weights[-1][:] = 0.0
agent.net.biases[-1][:] = 0.0
rng_data = np.random.default_rng(1)
batch_x, batch_t = [], []
for i in range(4000):
    chan = sample_realization(cfg, rng_data)
    pf = phase_features(chan)
    agent.normalizer.observe(pf)
    batch_x.append(pf)
    batch_t.append(ideal_targets(chan))
X = np.array(batch_x)
T = np.array(batch_t)
Xn = agent.normalizer.transform(X)
for step in range(4000):
    idx = rng_data.integers(0, len(X), size=256)
    grads, loss = agent.net.backward_mse(Xn[idx], T[idx])
    agent.net.adam_step(grads)
    if (step + 1) % 1000 == 0:
        print(f"supervised step {step+1}: loss {loss:.5f} argmax-match {best_response_match(agent):.3f}",
              flush=True)

# --- Part 2: same net, but masked single-level supervision (bandit-style data) ---
rng = np.random.default_rng(0)
agent2 = PhaseAgent(K, L, (128, 64), 1e-3, 1000, rng)
agent2.net.weights[-1][:] = 0.0
agent2.net.biases[-1][:] = 0.0
agent2.normalizer = agent.normalizer
rng_act = np.random.default_rng(5)
# emulate epsilon=0.05 bandit data against others fixed at level 0, reward exact
buf = ReplayBuffer(4000, 2 * K, action_width=K)
rng_b = np.random.default_rng(7)
for i in range(20000):
    chan = sample_realization(cfg, np.random.default_rng([3, i]))
    pf = phase_features(chan)
    c = chan.h_br * chan.h_ru
    explore = rng_act.random(K) < 0.05
    rnd = rng_act.integers(0, L, size=K)
    q = agent2.net.forward(agent2.normalizer.transform(pf)).reshape(K, L)
    levels = np.where(explore, rnd, q.argmax(axis=1))
    h2 = abs((c * table[levels]).sum())
    r = h2 / np.abs(c).sum()
    buf.push(Transition(pf, levels, r))
    if buf.size >= 512:
        feats, actions, rewards = buf.sample(512, rng_b)
        x = agent2.normalizer.transform(feats)
        grads, loss = agent2.net.backward_mse(x, rewards, agent2.branch_mask(actions))
        agent2.net.adam_step(grads)
    if (i + 1) % 5000 == 0:
        # measure achieved ratio with greedy actions
        rng_e = np.random.default_rng(42)
        ratios = []
        for _ in range(200):
            ch2 = sample_realization(cfg, rng_e)
            pf2 = phase_features(ch2)
            q2 = agent2.net.forward(agent2.normalizer.transform(pf2)).reshape(K, L)
            lv = q2.argmax(axis=1)
            c2 = ch2.h_br * ch2.h_ru
            ratios.append(abs((c2 * table[lv]).sum()) / np.abs(c2).sum())
        print(f"bandit step {i+1}: loss {loss:.5f} match {best_response_match(agent2):.3f} "
              f"greedy/bound {np.mean(ratios):.3f}", flush=True)
