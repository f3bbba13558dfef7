import numpy as np
import pytest

from morphosep import (
    AudioSignal,
    KamConfig,
    Kernel,
    StftConfig,
    binarize_kernel,
    hpss_split,
    kam_separate,
    kernel_cross,
    kernel_harmonic,
    kernel_percussive,
    kernel_repet,
    median_neighborhood,
    score_separation,
    stft,
    train_kernel,
)
from morphosep.kam import estimate_repetition_period
from morphosep.stft import Stft


def _stft_of(data):
    f = data.shape[0]
    cfg = StftConfig(window_length=2 * (f - 1), hop=f - 1)
    return Stft(data=np.asarray(data, dtype=complex), config=cfg, original_length=4 * f)


def _brute_median(matrix, kernel, row, col):
    taps = []
    half_h, half_w = (kernel.h - 1) // 2, (kernel.w - 1) // 2
    for r in range(kernel.h):
        for c in range(kernel.w):
            if kernel.values[r, c] != 1.0:
                continue
            rr, cc = row + r - half_h, col + c - half_w
            if 0 <= rr < matrix.shape[0] and 0 <= cc < matrix.shape[1]:
                taps.append(abs(matrix[rr, cc]))
    if not taps:
        return 0.0
    taps.sort()
    mid = len(taps) // 2
    if len(taps) % 2:
        return taps[mid]
    return 0.5 * (taps[mid - 1] + taps[mid])


class TestKernels:
    def test_harmonic_is_row_of_ones(self):
        k = kernel_harmonic(5)
        assert k.values.shape == (1, 5)
        assert np.array_equal(k.values, np.ones((1, 5)))

    def test_percussive_is_column_of_ones(self):
        k = kernel_percussive(3)
        assert np.array_equal(k.values, np.ones((3, 1)))

    def test_repet_taps_at_period_multiples(self):
        k = kernel_repet(period=4, count=3)
        expected = np.zeros((1, 9))
        expected[0, [0, 4, 8]] = 1.0
        assert np.array_equal(k.values, expected)

    def test_cross_is_center_row_and_column(self):
        k = kernel_cross(3, 5)
        expected = np.zeros((3, 5))
        expected[1, :] = 1.0
        expected[:, 2] = 1.0
        assert np.array_equal(k.values, expected)

    def test_even_dimensions_rejected(self):
        with pytest.raises(ValueError):
            kernel_harmonic(4)
        with pytest.raises(ValueError):
            kernel_percussive(2)
        with pytest.raises(ValueError):
            kernel_cross(4, 5)
        with pytest.raises(ValueError):
            Kernel(np.ones((2, 3)))

    def test_repet_validation(self):
        with pytest.raises(ValueError):
            kernel_repet(period=0)
        with pytest.raises(ValueError):
            kernel_repet(period=4, count=1)
        with pytest.raises(ValueError):
            kernel_repet(period=3, count=2)  # even width

    def test_binary_kernel_needs_a_tap(self):
        with pytest.raises(ValueError):
            Kernel(np.zeros((3, 3)))


class TestMedianNeighborhood:
    def test_constant_matrix(self):
        m = np.full((5, 5), 7.0)
        assert median_neighborhood(m, kernel_cross(3, 3), 2, 2) == 7.0

    def test_row_kernel_median_of_three(self):
        m = np.array([[1.0, 9.0, 2.0]])
        assert median_neighborhood(m, kernel_harmonic(3), 0, 1) == 2.0

    def test_empty_population_returns_zero(self):
        # center placed so every tap is out of range
        assert median_neighborhood(np.ones((1, 1)), kernel_percussive(3), -5, 0) == 0.0

    def test_matches_brute_force_on_500_random_triples(self, rng):
        kernels = [
            kernel_harmonic(5),
            kernel_percussive(7),
            kernel_cross(5, 9),
            kernel_repet(period=3, count=3),
            binarize_kernel(Kernel(rng.random((5, 5))), 0.5),
        ]
        for _ in range(100):
            matrix = rng.random((rng.integers(3, 12), rng.integers(3, 12)))
            for kernel in kernels:
                row = int(rng.integers(0, matrix.shape[0]))
                col = int(rng.integers(0, matrix.shape[1]))
                got = median_neighborhood(matrix, kernel, row, col)
                assert got == _brute_median(matrix, kernel, row, col)

    def test_requires_binary_kernel(self):
        with pytest.raises(ValueError):
            median_neighborhood(np.ones((3, 3)), Kernel(np.full((3, 3), 0.5)), 1, 1)


def _gs_oracle(x, kernels, alpha, n_iter):
    """Literal transcription of the in-place separation: frame-major point
    order, every source's kernel median from the current estimates, then
    the alpha-Wiener re-split at that point."""
    n_src = len(kernels)
    est = [x.copy() / n_src for _ in range(n_src)]
    n_freq, n_frames = x.shape
    for _ in range(n_iter):
        for t in range(n_frames):
            for f in range(n_freq):
                med = [median_neighborhood(np.abs(est[i]), kernels[i], f, t) ** alpha
                       for i in range(n_src)]
                denom = sum(med)
                for i in range(n_src):
                    est[i][f, t] = (med[i] / denom) * x[f, t] if denom > 0 else x[f, t] / n_src
    return est


class TestKamSeparate:
    def test_identical_kernels_split_in_half(self, rng):
        data = rng.standard_normal((9, 8)) + 1j * rng.standard_normal((9, 8))
        x = _stft_of(data)
        cfg = KamConfig(kernels=[kernel_harmonic(5, "voice"), kernel_harmonic(5, "other")],
                        n_iter=3)
        result = kam_separate(x, cfg)
        for s in result.stfts:
            assert np.array_equal(s.data, x.data / 2)

    @pytest.mark.parametrize("update", ["gauss-seidel", "jacobi"])
    def test_reconstruction_after_each_iteration(self, rng, update):
        data = rng.standard_normal((9, 11)) + 1j * rng.standard_normal((9, 11))
        x = _stft_of(data)
        kernels = [kernel_harmonic(5), kernel_percussive(5)]
        for n_iter in (1, 2, 4):
            result = kam_separate(x, KamConfig(kernels=kernels, n_iter=n_iter, update=update))
            total = sum(s.data for s in result.stfts)
            assert np.max(np.abs(total - x.data)) < 1e-12 * max(1.0, np.max(np.abs(x.data)))

    def test_gauss_seidel_matches_transcription_oracle(self, rng):
        data = rng.standard_normal((7, 9)) + 1j * rng.standard_normal((7, 9))
        x = _stft_of(data)
        kernels = [kernel_harmonic(3), kernel_percussive(5)]
        result = kam_separate(x, KamConfig(kernels=kernels, alpha=2.0, n_iter=2))
        oracle = _gs_oracle(data.astype(complex), kernels, 2.0, 2)
        for got, want in zip(result.stfts, oracle):
            assert np.allclose(got.data, want, atol=1e-12)

    def test_jacobi_first_iteration_matches_median_neighborhood(self, rng):
        data = rng.standard_normal((8, 10)) + 1j * rng.standard_normal((8, 10))
        x = _stft_of(data)
        kernels = [kernel_cross(3, 5, "voice"), kernel_percussive(5)]
        result = kam_separate(x, KamConfig(kernels=kernels, alpha=2.0, n_iter=1,
                                           update="jacobi"))
        half = np.abs(data) / 2
        for s_out, kernel in zip(result.stfts, kernels):
            med = np.array([[median_neighborhood(half, kernel, f, t) ** 2
                             for t in range(10)] for f in range(8)])
            other = kernels[1] if kernel is kernels[0] else kernels[0]
            med_other = np.array([[median_neighborhood(half, other, f, t) ** 2
                                   for t in range(10)] for f in range(8)])
            denom = med + med_other
            expected = np.where(denom > 0, med / np.where(denom > 0, denom, 1.0), 0.5) * data
            assert np.allclose(s_out.data, expected, atol=1e-12)

    def test_label_permutation_permutes_outputs(self, rng):
        data = rng.standard_normal((9, 8)) + 1j * rng.standard_normal((9, 8))
        x = _stft_of(data)
        k_h = kernel_harmonic(5)
        k_p = kernel_percussive(5)
        fwd = kam_separate(x, KamConfig(kernels=[k_h, k_p], n_iter=2))
        rev = kam_separate(x, KamConfig(kernels=[k_p, k_h], n_iter=2))
        assert np.allclose(fwd.stfts[0].data, rev.stfts[1].data, atol=1e-12)
        assert np.allclose(fwd.stfts[1].data, rev.stfts[0].data, atol=1e-12)
        assert fwd.labels == ["harmonic", "percussive"]
        assert rev.labels == ["percussive", "harmonic"]

    def test_silence_gives_zero_sources(self):
        x = stft(AudioSignal(np.zeros(22050), 22050))
        result = kam_separate(x, KamConfig(kernels=[kernel_harmonic(17), kernel_percussive(17)]))
        assert all(s.energy() == 0.0 for s in result.signals)

    def test_tone_plus_clicks_sir(self, tone_and_clicks):
        tone, clicks = tone_and_clicks
        mix = AudioSignal(tone.samples + clicks.samples, tone.sample_rate)
        cfg = KamConfig(kernels=[kernel_harmonic(17), kernel_percussive(17)],
                        alpha=2.0, n_iter=4)
        result = kam_separate(stft(mix), cfg)
        scores = score_separation(result.signals, [tone, clicks], result.labels)
        for s in scores:
            assert s.sir_db >= 10.0

    def test_config_validation(self):
        with pytest.raises(ValueError):
            KamConfig(kernels=[kernel_harmonic(5)])
        with pytest.raises(ValueError):
            KamConfig(kernels=[Kernel(np.full((3, 3), 0.4)), kernel_harmonic(3)])
        with pytest.raises(ValueError):
            KamConfig(kernels=[kernel_harmonic(3), kernel_percussive(3)], alpha=0.0)
        with pytest.raises(ValueError):
            KamConfig(kernels=[kernel_harmonic(3), kernel_percussive(3)], update="chaotic")


class TestTrainKernel:
    def test_constant_spectrogram_gives_uniform_kernel(self):
        kernel = train_kernel(np.full((40, 50), 2.5), 5, 7)
        assert np.allclose(kernel.values, 1.0 / np.sqrt(35.0), atol=1e-12)

    def test_harmonic_source_trains_row_heavy_kernel(self, rng):
        fs = 22050
        t = np.arange(3 * fs) / fs
        harm = sum(np.sin(2 * np.pi * 220 * k * t + rng.uniform(0, 6)) / k
                   for k in range(1, 6))
        kernel = train_kernel(stft(AudioSignal(harm, fs)), 9, 9)
        center = 4
        assert kernel.values[center, :].mean() > 2.0 * kernel.values[:, center].mean()

    def test_click_source_trains_column_heavy_kernel(self, rng):
        fs = 22050
        t = np.arange(3 * fs) / fs
        clicks = np.zeros_like(t)
        burst_len = int(0.003 * fs)
        envelope = np.hanning(2 * burst_len)[burst_len:]
        for start in np.arange(0.1, 3.0, 0.2):
            i = int(start * fs)
            clicks[i:i + burst_len] += envelope * rng.uniform(-1, 1, burst_len)
        kernel = train_kernel(stft(AudioSignal(clicks, fs)), 9, 9)
        center = 4
        assert kernel.values[:, center].mean() > 2.0 * kernel.values[center, :].mean()

    def test_scale_invariance(self, rng):
        mag = rng.random((30, 25)) + 0.1
        a = train_kernel(mag, 5, 5)
        b = train_kernel(123.4 * mag, 5, 5)
        assert np.max(np.abs(a.values - b.values)) < 1e-12

    def test_non_negative_output(self, rng):
        kernel = train_kernel(rng.random((20, 20)), 3, 3)
        assert kernel.values.min() >= 0.0

    def test_all_zero_source_rejected(self):
        with pytest.raises(ValueError):
            train_kernel(np.zeros((20, 20)), 3, 3)

    def test_too_small_spectrogram_rejected(self):
        with pytest.raises(ValueError):
            train_kernel(np.ones((4, 4)), 5, 5)

    def test_even_dims_rejected(self):
        with pytest.raises(ValueError):
            train_kernel(np.ones((10, 10)), 4, 5)


class TestBinarize:
    def test_uniform_kernel_thresholds(self):
        uniform = Kernel(np.full((3, 3), 1.0 / 3.0))
        assert binarize_kernel(uniform, 0.0).values.sum() == 9
        with pytest.raises(ValueError):
            binarize_kernel(uniform, 1.0)

    def test_strict_threshold(self):
        kernel = Kernel(np.array([[0.54, 0.55, 0.53]]))
        binary = binarize_kernel(kernel, 0.54)
        assert np.array_equal(binary.values, [[0.0, 1.0, 0.0]])


def test_hpss_split_labels_and_reconstruction(tone_and_clicks):
    tone, clicks = tone_and_clicks
    mix = AudioSignal(tone.samples + clicks.samples, tone.sample_rate)
    result = hpss_split(mix, size=17)
    assert result.labels == ["harmonic", "percussive"]
    total = np.sum([s.samples for s in result.signals], axis=0)
    assert np.linalg.norm(total - mix.samples) / np.linalg.norm(mix.samples) < 1e-9


def test_estimate_repetition_period_on_looped_chord():
    from morphosep import SynthRecipe, synth_mixture

    mix = synth_mixture(SynthRecipe(components=("chord_loop",), duration=20.0, seed=0))
    x = stft(mix.mixture, StftConfig())
    period = estimate_repetition_period(x)
    frame_rate = 22050 / 512
    assert abs(period - frame_rate * 1.0) <= 1.0  # 1 s loop
