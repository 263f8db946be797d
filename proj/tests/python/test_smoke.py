import os
import pathlib

import pytest

import termplan

FIXTURES = pathlib.Path(
    os.environ.get(
        "TERMPLAN_FIXTURE_DIR",
        pathlib.Path(__file__).resolve().parents[2] / "fixtures",
    )
)


def load(domain, problem):
    return termplan.load_files(FIXTURES / domain, FIXTURES / problem)


@pytest.fixture(scope="module")
def mm():
    return load("mm.tmd", "mm.tmp")


@pytest.fixture(scope="module")
def sc():
    return load("sc.tmd", "sc.tmp")


def test_validate_and_repr(mm):
    assert mm.validate() == []
    assert "machine-park-1" in repr(mm)
    assert mm.worlds() == 4
    assert mm.actual_world() == "w0"


def test_plan_and_verify(mm):
    plan = mm.plan(max_depth=3)
    assert plan == ["Malfunction(m1,box)@em", "Reboot(a1,sn1)@er1"]
    assert mm.plan(max_depth=0) is None

    pi = (FIXTURES / "mm_pi.plan").read_text()
    res = mm.verify(pi)
    assert res["valid"] is True
    assert res["trace_worlds"] == [4, 2, 4]

    prime = (FIXTURES / "mm_pi_prime.plan").read_text()
    res = mm.verify(prime)
    assert res["valid"] is False
    assert "step 3" in res["failure"]


def test_apply_chain(mm):
    after = mm.apply("Malfunction(m1,box)@em")
    assert after is not None
    assert after.worlds() == 2
    assert mm.worlds() == 4  # the original task is untouched

    done = after.apply("Reboot(a1,sn1)")  # @event defaults to the designated one
    assert done.check(done.goal_text())

    assert mm.apply("Reboot(a2,sn1)@er1") is None


def test_check_formulas(sc):
    assert sc.check("(forall (?x - agent_id) (knows (?x) (In b1 r2)))")
    assert not sc.check("(exists (?x - agent_id) (knows (?x) (Color b1 red)))")
    assert sc.check("(Color b1 green)", at="w_green")

    with pytest.raises(termplan.ParseFailure):
        sc.check("(Color b1")
    with pytest.raises(termplan.EngineError):
        sc.check("true", at="nowhere")


def test_translate(mm):
    res = mm.translate(
        "(after (Malfunction m1 box) (knows (m1) (malfunction box)))"
    )
    assert res["complexity_in"] == 12
    assert res["complexity_out"] < res["complexity_in"]
    assert "after" not in res["output"]
    assert all(s["before"] > s["after"] for s in res["steps"])
    assert res["steps"][0]["axiom"] == "knowledge"


def test_roundtrip_and_frames(sc):
    again = termplan.load_task(sc.domain_text(), sc.problem_text())
    assert again.problem_text() == sc.problem_text()
    assert again.goal_text() == sc.goal_text()

    frames = sc.frames()
    assert frames["worlds"] == 2
    assert frames["agents"]["Alpha1"]["reflexive"] is True


def test_check_frame():
    rep = termplan.check_frame("T", worlds=2)
    assert rep["confirmed"] is True
    rep = termplan.check_frame("N", n=2, agents=3, worlds=2)
    assert rep["confirmed"] is True
    rep = termplan.check_frame("T", budget=10)
    assert rep["inconclusive"] is True
