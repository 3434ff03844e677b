import numpy as np
from hypothesis import given
from hypothesis import strategies as st

from encaqc.dynamics import Trajectory
from encaqc.io import TRAJECTORY_HEADER, fmt, parse_snapshots, read_trajectory, rows_to_csv, snapshots_text, write_trajectory

finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


@given(finite)
def test_fmt_round_trips_doubles(x):
    assert float(fmt(x)) == x


def test_fmt_types():
    assert fmt(3) == "3"
    assert fmt(np.int64(-2)) == "-2"
    assert fmt(True) == "true"
    assert fmt("XIZ") == "XIZ"
    assert fmt(0.1) == "0.10000000000000001"


def test_rows_to_csv_header_only():
    assert rows_to_csv(("a", "b"), []) == "a,b\n"


@given(st.lists(st.tuples(finite, finite, finite, finite, finite, finite), min_size=1, max_size=20))
def test_trajectory_round_trip(tmp_path_factory, rows):
    arr = np.array(rows)
    traj = Trajectory(times=arr[:, 0], P_c=arr[:, 1], P_e1=arr[:, 2], fidelity=arr[:, 3],
                      trace_err=arr[:, 4], min_eig=arr[:, 5])
    path = tmp_path_factory.mktemp("traj") / "t.csv"
    write_trajectory(path, traj)
    back = read_trajectory(path)
    for k, name in enumerate(TRAJECTORY_HEADER):
        np.testing.assert_array_equal(back[name], arr[:, k])


def test_snapshot_round_trip(rng):
    mats = [(0.5, rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))),
            (1.25, rng.normal(size=3) + 1j * rng.normal(size=3))]
    back = parse_snapshots(snapshots_text(mats))
    assert [t for t, _ in back] == [0.5, 1.25]
    np.testing.assert_array_equal(back[0][1], mats[0][1])
    np.testing.assert_array_equal(back[1][1], mats[1][1][None, :])
    assert snapshots_text([]) == ""
