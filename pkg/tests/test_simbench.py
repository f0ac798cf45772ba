import numpy as np
import pytest

from designloop.catalog import Design, DesignParams, render_design
from designloop.simbench import (
    CalibrationError,
    ExperimentConfig,
    TASKS,
    Thresholds,
    assign_labels,
    calibrate_thresholds,
    concept_score,
    concept_scores,
    label_probabilities,
    run_experiment,
    simulated_select,
    stratified_holdout,
)


def _design(body_color=(0.5, 0.5, 0.5), shape="rectangle", wf=0.5, hf=0.8):
    params = DesignParams(
        body_shape=shape,
        width_frac=wf,
        height_frac=hf,
        body_color=body_color,
        cap_color=body_color,
        cap_height_frac=0.1,
        texture_seed=0,
    )
    image, mask = render_design(params, (128, 128))
    return Design(id="x", params=params, image_u8=np.round(image * 255).astype(np.uint8), mask=mask)


class TestConceptScore:
    def test_red_bottle_scores_high(self):
        # The specular highlight lifts G and B slightly, so dominance is
        # just under the pure-color value of 1.
        d = _design(body_color=(1.0, 0.0, 0.0))
        score = concept_score(TASKS["red"], d)
        assert score > 0.8

    def test_synthetic_pure_red_is_one(self):
        img = np.zeros((4, 4, 3))
        img[..., 0] = 1.0
        d = Design(
            id="r",
            params=_design().params,
            image_u8=np.round(img * 255).astype(np.uint8),
            mask=np.ones((4, 4), dtype=bool),
        )
        assert concept_score(TASKS["red"], d) == 1.0

    def test_thin_is_aspect(self):
        d = _design(wf=0.25, hf=1.0)
        assert concept_score(TASKS["thin"], d) == pytest.approx(0.25, abs=2 / 128)
        assert TASKS["thin"].direction == "below"

    def test_gray_blue_score_zero(self):
        img = np.full((4, 4, 3), 0.5)
        d = Design(
            id="g",
            params=_design().params,
            image_u8=np.round(img * 255).astype(np.uint8),
            mask=np.ones((4, 4), dtype=bool),
        )
        assert concept_score(TASKS["blue"], d) == 0.0

    def test_circle_body_scores_circle_high(self):
        round_d = _design(shape="circle-body", wf=0.6, hf=0.7)
        thin_d = _design(shape="rectangle", wf=0.2, hf=0.95)
        assert concept_score(TASKS["circle-body"], round_d) > concept_score(
            TASKS["circle-body"], thin_d
        )


class TestCalibration:
    @pytest.mark.parametrize("name", ["red", "blue", "fat", "thin"])
    def test_always_rate_matches_target(self, small_catalog_module, name):
        catalog = small_catalog_module
        task = TASKS[name]
        scores = concept_scores(task, catalog)
        # 400 designs: 0.1pp granularity is unreachable, so check on the
        # counting grid instead: rate within one design of the target.
        try:
            thr = calibrate_thresholds(task, catalog, scores)
        except CalibrationError:
            pytest.skip("grid too coarse at this catalog size")
        p = label_probabilities(task, thr, scores)
        always = (p >= 1.0).mean() * 100
        target = {"red": 5.5, "blue": 0.5, "fat": 7.0, "thin": 3.6}[name]
        assert abs(always - target) <= 100 / len(catalog.designs) + 0.1

    def test_zero_variance_scores_rejected(self, small_catalog_module):
        task = TASKS["thin"]
        flat = np.full(len(small_catalog_module.designs), 0.7)
        with pytest.raises(CalibrationError, match="variance"):
            calibrate_thresholds(task, small_catalog_module, flat)

    def test_expected_average_matches_target(self, small_catalog_module):
        catalog = small_catalog_module
        task = TASKS["thin"]
        scores = concept_scores(task, catalog)
        thr = calibrate_thresholds(task, catalog, scores)
        p = label_probabilities(task, thr, scores)
        assert p.mean() * 100 == pytest.approx(7.5, abs=0.3)

    def test_below_direction_soft_on_negative_side(self, small_catalog_module):
        thr = calibrate_thresholds(TASKS["thin"], small_catalog_module)
        assert thr.soft > thr.hard  # for 'below', larger scores are negative


class TestLabels:
    def test_hard_rule_overrides_sigmoid(self):
        task = TASKS["red"]
        thr = Thresholds(hard=0.6, soft=0.2)
        p = label_probabilities(task, thr, np.array([0.6, 0.7]))
        assert (p == 1.0).all()

    def test_sigmoid_midpoint(self):
        task = TASKS["red"]
        thr = Thresholds(hard=0.6, soft=0.2)
        p = label_probabilities(task, thr, np.array([0.4]))
        assert p[0] == pytest.approx(0.5)

    def test_beyond_soft_is_zero(self):
        task = TASKS["red"]
        thr = Thresholds(hard=0.6, soft=0.2)
        p = label_probabilities(task, thr, np.array([0.1]))
        assert p[0] == 0.0

    def test_below_direction_band(self):
        task = TASKS["thin"]
        thr = Thresholds(hard=0.2, soft=0.4)  # thin: smaller aspect is positive
        p = label_probabilities(task, thr, np.array([0.15, 0.3, 0.5]))
        assert p[0] == 1.0
        assert p[1] == pytest.approx(0.5)
        assert p[2] == 0.0

    def test_same_seed_identical_labels(self, small_catalog_module):
        task = TASKS["thin"]
        thr = calibrate_thresholds(task, small_catalog_module)
        a = assign_labels(task, thr, small_catalog_module, run_seed=9)
        b = assign_labels(task, thr, small_catalog_module, run_seed=9)
        assert np.array_equal(a.labels, b.labels)

    def test_simulated_select_exact_positives(self, small_catalog_module):
        task = TASKS["thin"]
        thr = calibrate_thresholds(task, small_catalog_module)
        labels = assign_labels(task, thr, small_catalog_module, run_seed=2)
        proposed = small_catalog_module.ids[:30]
        picked = simulated_select(labels, proposed)
        assert picked == [d for d in proposed if labels[d]]
        assert simulated_select(labels, [d for d in proposed if not labels[d]]) == []


class TestHoldout:
    def test_stratified_counts(self):
        always = np.zeros(1000, dtype=bool)
        always[:55] = True
        idx = stratified_holdout(always, 200, np.random.default_rng(0))
        assert len(idx) == 200
        assert always[idx].sum() == round(200 * 55 / 1000)

    def test_bad_sizes_rejected(self):
        with pytest.raises(ValueError):
            stratified_holdout(np.zeros(10, dtype=bool), 10, np.random.default_rng(0))


class TestRunExperiment:
    def test_shape_and_determinism(self, small_catalog_module, small_store_module):
        cfg = ExperimentConfig(
            task="thin", strategy="rand", rounds=3, runs=2, holdout=80, base_seed=77
        )
        a = run_experiment(small_catalog_module, cfg, store=small_store_module)
        b = run_experiment(small_catalog_module, cfg, store=small_store_module)
        assert len(a.rows) == 3
        assert a.to_csv() == b.to_csv()
        assert not a.errors
        header = a.to_csv().splitlines()[0]
        assert header == "strategy,task,round,auc_mean,auc_std,nsel_mean,nsel_std,runs_completed"

    def test_holdout_never_proposed(self, small_catalog_module, small_store_module, monkeypatch):
        # Intercept session creation to record the pool each run.
        import designloop.simbench as simbench_mod

        pools = []
        real_create = simbench_mod.create_session

        def spy(catalog, strategy, seed, store=None, pool=None, **kw):
            pools.append(set(pool))
            return real_create(catalog, strategy, seed, store=store, pool=pool, **kw)

        monkeypatch.setattr(simbench_mod, "create_session", spy)
        cfg = ExperimentConfig(
            task="thin", strategy="rand", rounds=2, runs=2, holdout=100, base_seed=3
        )
        run_experiment(small_catalog_module, cfg, store=small_store_module)
        all_ids = set(small_catalog_module.ids)
        for pool in pools:
            assert len(all_ids - pool) == 100

    def test_failed_runs_recorded(self, small_catalog_module, small_store_module):
        cfg = ExperimentConfig(
            task="thin", strategy="rand", rounds=1, runs=2, holdout=390, base_seed=0
        )
        # 400 - 390 = 10 designs < 18 per round: every run fails, table flags it.
        table = run_experiment(small_catalog_module, cfg, store=small_store_module)
        assert len(table.errors) == 2
        assert table.rows[0]["runs_completed"] == 0


@pytest.fixture(scope="module")
def small_catalog_module(request):
    return request.getfixturevalue("small_catalog")


@pytest.fixture(scope="module")
def small_store_module(request):
    return request.getfixturevalue("small_store")
