import numpy as np
import pytest

from morphosep import AudioSignal, TvConfig, tv_masks, tv_separate


def _sweep_oracle(w, cfg, n_iter):
    """Literal point-by-point transcription of the coordinate updates:
    full M_h sweep then full M_p sweep per iteration, frame-major order,
    out-of-range neighbors read as zero, results clamped to [0, W-other]."""
    n_freq, n_frames = w.shape
    m_h = np.zeros_like(w)
    m_p = np.zeros_like(w)
    bonus_h = cfg.lambda2 / 2.0
    bonus_p = cfg.lambda2 / (2.0 * cfg.lambda1)
    for _ in range(n_iter):
        for n in range(n_frames):
            for m in range(n_freq):
                left = m_h[m, n - 1] if n > 0 else 0.0
                right = m_h[m, n + 1] if n + 1 < n_frames else 0.0
                cand = 0.5 * (left + right) + bonus_h
                m_h[m, n] = max(min(cand, w[m, n] - m_p[m, n]), 0.0)
        for n in range(n_frames):
            for m in range(n_freq):
                below = m_p[m - 1, n] if m > 0 else 0.0
                above = m_p[m + 1, n] if m + 1 < n_freq else 0.0
                cand = 0.5 * (below + above) + bonus_p
                m_p[m, n] = max(min(cand, w[m, n] - m_h[m, n]), 0.0)
    return m_h, m_p


def test_zero_w_gives_zero_masks():
    masks = tv_masks(np.zeros((6, 7)), TvConfig(n_iter=3))
    for m in masks.masks:
        assert not np.any(m)


def test_single_sweep_3x3_frozen_values():
    # one sweep on W = ones(3, 3), lambda1 = 0.25, lambda2 = 0.025 from zeros;
    # expected values computed by hand from the two update lines
    captured = {}
    tv_masks(np.ones((3, 3)), TvConfig(n_iter=1),
             callback=lambda it, mh, mp: captured.update(mh=mh.copy(), mp=mp.copy()))
    expected_h_row = [0.0125, 0.01875, 0.021875]
    expected_p_col = [0.05, 0.075, 0.0875]
    assert np.allclose(captured["mh"], np.tile(expected_h_row, (3, 1)), atol=1e-15)
    assert np.allclose(captured["mp"], np.tile(np.array(expected_p_col)[:, None], (1, 3)),
                       atol=1e-15)


@pytest.mark.parametrize("n_iter", [1, 2, 5])
def test_sweeps_match_transcription_oracle(rng, n_iter):
    w = rng.random((9, 12)) * 2.0
    cfg = TvConfig(n_iter=n_iter)
    captured = {}
    tv_masks(w, cfg, callback=lambda it, mh, mp: captured.update(mh=mh.copy(), mp=mp.copy()))
    oracle_h, oracle_p = _sweep_oracle(w, cfg, n_iter)
    assert np.array_equal(captured["mh"], oracle_h)
    assert np.array_equal(captured["mp"], oracle_p)


def test_feasibility_every_sweep(rng):
    w = rng.random((15, 20))
    worst_dev = 0.0
    worst_min = np.inf

    def check(it, m_h, m_p):
        nonlocal worst_dev, worst_min
        m_v = w - m_h - m_p
        worst_dev = max(worst_dev, np.abs(m_v + m_h + m_p - w).max())
        worst_min = min(worst_min, m_h.min(), m_p.min(), m_v.min())

    masks = tv_masks(w, TvConfig(n_iter=200), callback=check)
    assert worst_dev < 1e-9
    assert worst_min >= 0.0
    total = sum(masks.masks)
    assert np.abs(total - w).max() < 1e-9
    assert min(m.min() for m in masks.masks) >= 0.0


def test_row_and_column_selectivity():
    w_row = np.zeros((30, 40))
    w_row[15, :] = 1.0
    masks = tv_masks(w_row, TvConfig())
    assert masks.masks[1].sum() >= 0.6 * w_row.sum()  # M_h

    w_col = np.zeros((30, 40))
    w_col[:, 20] = 1.0
    masks = tv_masks(w_col, TvConfig())
    assert masks.masks[2].sum() >= 0.6 * w_col.sum()  # M_p


def test_negative_w_rejected():
    with pytest.raises(ValueError):
        tv_masks(np.array([[1.0, -0.1]]), TvConfig(n_iter=1))


def test_config_validation():
    with pytest.raises(ValueError):
        TvConfig(lambda1=0.0)
    with pytest.raises(ValueError):
        TvConfig(gamma=1.5)
    with pytest.raises(ValueError):
        TvConfig(n_iter=0)


def test_separate_sustained_tone_routes_harmonic():
    fs = 22050
    t = np.arange(4 * fs) / fs
    tone = sum(np.sin(2 * np.pi * 440 * k * t) / k for k in (1, 2, 3))
    result = tv_separate(AudioSignal(tone, fs))
    energies = dict(zip(result.labels, (s.energy() for s in result.signals)))
    assert energies["harmonic"] >= 0.6 * sum(energies.values())


def test_separate_click_train_routes_percussive(rng):
    fs = 22050
    t = np.arange(4 * fs) / fs
    clicks = np.zeros_like(t)
    burst_len = int(0.003 * fs)
    burst = np.hanning(2 * burst_len)[burst_len:] * rng.uniform(-1, 1, burst_len)
    for start in np.arange(0.1, 4.0, 0.25):
        i = int(start * fs)
        clicks[i:i + burst_len] += burst
    result = tv_separate(AudioSignal(clicks, fs))
    energies = dict(zip(result.labels, (s.energy() for s in result.signals)))
    assert energies["percussive"] >= 0.6 * sum(energies.values())


def test_separate_silence_gives_zero_sources():
    result = tv_separate(AudioSignal(np.zeros(22050), 22050))
    assert result.labels == ["voice", "harmonic", "percussive"]
    for s in result.signals:
        assert s.energy() == 0.0


def test_separate_reconstructs_preprocessed_mixture(rng):
    from morphosep.io import resample
    from morphosep.tv import _highpass

    x = AudioSignal(rng.standard_normal(3 * 22050) * 0.2, 22050)
    cfg = TvConfig(n_iter=20)
    result = tv_separate(x, cfg)
    prepped = _highpass(resample(x, cfg.target_rate), cfg.highpass_hz)
    total = np.sum([s.samples for s in result.signals], axis=0)
    rel = np.linalg.norm(total - prepped.samples) / np.linalg.norm(prepped.samples)
    assert rel < 1e-9
