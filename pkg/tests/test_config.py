import pytest
from pydantic import ValidationError

from treealign.config import EvalConfig, PerturbConfig, epsilon, load_config


def test_defaults():
    config = EvalConfig()
    assert config.label_mode == "unlabeled"
    assert config.include_preterminals is True
    assert config.tolerance == 0.020
    assert config.miou_strict is True


def test_from_yaml_and_overrides(tmp_path):
    path = tmp_path / "preset.yaml"
    path.write_text("label_mode: exact_label\ntolerance: 0.05\njobs: 2\n")
    config = load_config(path)
    assert config.label_mode == "exact_label"
    assert config.jobs == 2

    overridden = config.with_overrides(label_mode="unlabeled", tolerance=None, jobs=3)
    assert overridden.label_mode == "unlabeled"
    assert overridden.tolerance == 0.05
    assert overridden.jobs == 3
    assert config.label_mode == "exact_label"


def test_invalid_values_rejected():
    with pytest.raises(ValidationError):
        EvalConfig(label_mode="fuzzy")
    with pytest.raises(ValidationError):
        EvalConfig(jobs=0)
    with pytest.raises(ValidationError):
        EvalConfig().with_overrides(tolerance=-1.0)


def test_shipped_presets_load(fixtures_dir):
    configs = fixtures_dir.parent.parent / "configs"
    assert load_config(configs / "eval_default.yaml") == EvalConfig()
    assert load_config(configs / "eval_ptb.yaml").strip_function_tags is True
    assert PerturbConfig.from_yaml(configs / "perturb_insert.yaml").kind == "insert"


def test_epsilon_default_and_env(monkeypatch):
    from treealign.config import get_settings

    assert epsilon() == 1e-9
    monkeypatch.setenv("TREEALIGN_EPSILON", "1e-6")
    get_settings.cache_clear()
    assert epsilon() == 1e-6
    monkeypatch.setenv("TREEALIGN_EPSILON", "0")
    get_settings.cache_clear()
    with pytest.raises(ValidationError):
        epsilon()
