"""Detection-rate metrics and report assembly."""

import numpy as np
import pytest

from pmugame.equilibrium import solve_minimax
from pmugame.evaluation import (
    DetectionReport,
    aggregate_rows,
    build_report,
    detection_rate,
    naive_detection_rate,
)
from pmugame.game import THETA, AttackAction, DefenseAction, PayoffMatrix


@pytest.fixture()
def toy_matrix():
    attacks = (
        AttackAction(1, (2,)),
        AttackAction(1, (THETA,)),
        AttackAction(1, (3,)),
    )
    defenses = (DefenseAction(3), DefenseAction(4))
    values = np.array([[0.0, 0.5], [0.3, 0.0], [0.0, 0.5]])
    detected = np.array([[True, False], [False, True], [True, False]])
    return PayoffMatrix(
        attacks=attacks, defenses=defenses, values=values, detected=detected
    )


def test_detection_rate_hand_example(toy_matrix):
    # [DERIVED] rho^T D mu = 0.5*0.25 + 0.5*0.75 with rows 0 and 1 active.
    rate = detection_rate(toy_matrix, [0.5, 0.5, 0.0], [0.25, 0.75])
    assert rate == pytest.approx(0.5)


def test_naive_rate_is_uniform_defender(toy_matrix):
    # [TRIVIAL] consistency with the explicit uniform mix.
    sa = [0.2, 0.5, 0.3]
    assert naive_detection_rate(toy_matrix, sa) == pytest.approx(
        detection_rate(toy_matrix, sa, [0.5, 0.5])
    )


def test_detection_rate_complement(toy_matrix):
    # [DERIVED] Pr[detected] + Pr[undetected] = 1 for any strategy pair.
    sa, sd = [0.1, 0.6, 0.3], [0.4, 0.6]
    undetected = float(
        np.asarray(sa) @ (~toy_matrix.detected).astype(float) @ np.asarray(sd)
    )
    assert detection_rate(toy_matrix, sa, sd) + undetected == pytest.approx(1.0)


def test_detection_rate_linear_in_attacker(toy_matrix):
    # [DERIVED] the rate is bilinear, hence affine along strategy mixtures.
    sd = [0.4, 0.6]
    p, q = [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]
    for alpha in (0.0, 0.25, 0.7, 1.0):
        mix = [alpha * a + (1 - alpha) * b for a, b in zip(p, q)]
        assert detection_rate(toy_matrix, mix, sd) == pytest.approx(
            alpha * detection_rate(toy_matrix, p, sd)
            + (1 - alpha) * detection_rate(toy_matrix, q, sd)
        )


def test_detection_rate_validation(toy_matrix):
    with pytest.raises(ValueError, match="dimension"):
        detection_rate(toy_matrix, [1.0], [0.5, 0.5])
    with pytest.raises(ValueError, match="distribution"):
        detection_rate(toy_matrix, [0.5, 0.5, 0.5], [0.5, 0.5])


def test_aggregate_rows_merges_identical_rows(toy_matrix):
    # Rows 0 and 2 share payoff and detection columns; they merge in first-
    # appearance order and pool their probability.
    rows = aggregate_rows(toy_matrix, [0.25, 0.5, 0.25])
    assert rows[0] == ("1:{p1-2} + 1:{p1-3}", pytest.approx(0.5))
    assert rows[1] == ("1:{theta1}", pytest.approx(0.5))


def test_report_fields_and_rendering(ieee14_matrix):
    res = solve_minimax(ieee14_matrix)
    report = build_report("nozib", ieee14_matrix, res.sigma_a, res.sigma_d)
    assert report.no_defense_rate == 0.0
    # The defender optimizes expected payoff, not raw detection rate, so the
    # naive/equilibrium ordering is not asserted; both must be valid rates.
    assert 0.0 <= report.naive_rate <= 1.0
    assert 0.0 <= report.rate <= 1.0
    assert report.improvement == pytest.approx(
        100 * (report.rate - report.naive_rate)
    )
    doc = report.to_document()
    assert doc["scenario"] == "nozib"
    assert all(row["probability"] > 0 for row in doc["attacker_strategy"])
    text = report.render_text()
    assert "detection rate (strategy pair)" in text
    assert "improvement over naive" in text


def test_report_rejects_bad_rates():
    with pytest.raises(ValueError, match="rate"):
        DetectionReport(
            scenario="x",
            sigma_a=np.array([1.0]),
            sigma_d=np.array([1.0]),
            rate=1.5,
            naive_rate=0.0,
            no_defense_rate=0.0,
            attacker_table=[],
            defender_table=[],
        )
