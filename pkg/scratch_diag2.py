import numpy as np

from risbc import SystemConfig, sample_realization, phase_features
from risbc.agents import FeatureNormalizer
from risbc.neural import Mlp

K, L = 8, 8
cfg = SystemConfig(k_ris=K, m_tags=4)
table = np.exp(1j * 2 * np.pi * np.arange(L) / L)


def ideal_targets(chan):
    c = chan.h_br * chan.h_ru
    bound = np.abs(c).sum()
    out = np.empty(K * L)
    total0 = c.sum()
    for k in range(K):
        others = total0 - c[k]
        out[k * L:(k + 1) * L] = np.abs(others + c[k] * table) / bound
    return out


def cartesian(pf):
    m = pf[..., 0::2]
    ang = pf[..., 1::2] * np.pi
    out = np.empty_like(pf)
    out[..., 0::2] = m * np.cos(ang)
    out[..., 1::2] = m * np.sin(ang)
    return out


def run(feature_kind, hidden, steps=6000, batch=256, lr=1e-3):
    rng_data = np.random.default_rng(1)
    X, T = [], []
    for i in range(4000):
        chan = sample_realization(cfg, rng_data)
        pf = phase_features(chan)
        X.append(pf)
        T.append(ideal_targets(chan))
    X = np.array(X)
    T = np.array(T)
    if feature_kind == "cartesian":
        X = cartesian(X)
    norm = FeatureNormalizer(2 * K, 4000)
    for row in X[:4000]:
        norm.observe(row)
    Xn = norm.transform(X)

    net = Mlp([2 * K, *hidden, K * L], np.random.default_rng(0), lr)
    net.weights[-1][:] = 0.0
    net.biases[-1][:] = 0.0

    # held-out
    rng_h = np.random.default_rng(99)
    XH, TH = [], []
    for i in range(300):
        chan = sample_realization(cfg, rng_h)
        XH.append(phase_features(chan))
        TH.append(ideal_targets(chan))
    XH = np.array(XH)
    if feature_kind == "cartesian":
        XH = cartesian(XH)
    XH = norm.transform(XH)
    TH = np.array(TH)

    rng_b = np.random.default_rng(7)
    for step in range(steps):
        idx = rng_b.integers(0, len(X), size=batch)
        grads, loss = net.backward_mse(Xn[idx], T[idx])
        net.adam_step(grads)
        if (step + 1) % 2000 == 0:
            q = net.forward(XH).reshape(-1, K, L)
            t = TH.reshape(-1, K, L)
            match = (q.argmax(axis=2) == t.argmax(axis=2)).mean()
            # achieved ratio when picking net argmax per branch vs ideal per-branch argmax
            print(f"  {feature_kind} {hidden} step {step+1}: loss {loss:.5f} match {match:.3f}",
                  flush=True)


print("polar [512,256]:")
run("polar", (512, 256))
print("cartesian [128,64]:")
run("cartesian", (128, 64))
print("cartesian [256,128]:")
run("cartesian", (256, 128))
