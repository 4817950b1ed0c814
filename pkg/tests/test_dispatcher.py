import pytest

from core.dispatcher import CommandCategory, CommandOutcome, Dispatcher, RunConfig, flag, get_dispatcher
from core.errors import MalformedInput
from core.mpcore import Field


@pytest.fixture
def dispatcher():
    d = Dispatcher()

    @d.register_decorator("echo-seed", CommandCategory.NORMS, "echo the seed", [flag("--x", type=int)])
    def echo(config):
        return CommandOutcome(str(config.seed), passed=config.option("x", 0) >= 0)

    def broken(config):
        raise MalformedInput("field 'in': no such file")

    d.register("broken", CommandCategory.NORMS, broken)
    return d


def test_dispatch_returns_result(dispatcher):
    result = dispatcher.dispatch(RunConfig("echo-seed", {"x": 3}, seed=7))
    assert result["success"] is True
    assert result["handler"] == "echo-seed"
    assert result["result"].text == "7"
    assert result["result"].passed


def test_handler_errors_become_result_dicts(dispatcher):
    result = dispatcher.dispatch(RunConfig("broken"))
    assert result["success"] is False
    assert result["error_type"] == "MalformedInput"
    assert "'in'" in result["error"]


def test_unknown_command(dispatcher):
    result = dispatcher.dispatch(RunConfig("zzzzzz"))
    assert result["success"] is False
    assert "zzzzzz" in result["error"]


def test_unregister(dispatcher):
    dispatcher.unregister("broken")
    dispatcher.unregister("broken")
    assert [h.name for h in dispatcher.get_registered_commands()] == ["echo-seed"]
    assert dispatcher.dispatch(RunConfig("broken"))["success"] is False


def test_fuzzy_resolution(dispatcher):
    pytest.importorskip("rapidfuzz")
    assert dispatcher.resolve_name("echo-seed") == "echo-seed"
    assert dispatcher.resolve_name("echo-sed") == "echo-seed"
    assert dispatcher.resolve_name("qqqqqqqq") is None


@pytest.mark.parametrize("kwargs, field_name", [
    (dict(seed=0), "seed"),
    (dict(starts=0), "starts"),
    (dict(tol=-1.0), "tol"),
])
def test_run_config_validation(kwargs, field_name):
    with pytest.raises(MalformedInput, match=field_name):
        RunConfig("norm", **kwargs)


def test_run_config_defaults():
    config = RunConfig("norm", {"certify": None}, scalar_field="complex")
    assert config.scalar_field is Field.COMPLEX
    assert config.option("certify", False) is False


def test_registered_commands():
    import commands  # noqa: F401
    names = {h.name for h in get_dispatcher().get_registered_commands()}
    assert names == {"norm", "polarize", "compose-check", "hyper-check", "summing", "bh-scan", "ksz"}
