"""CSV and plain-text snapshot formats.

Floats are written with 17 significant digits so that files round-trip
doubles exactly.

Snapshot format, one block per state::

    # snapshot t=<time> rows=<n> cols=<m>
    <re> <im> <re> <im> ...      (one line per row, complex pairs)
"""
import csv
import io

import numpy as np

TRAJECTORY_HEADER = ("t", "P_c", "P_e1", "fidelity", "trace_err", "min_eig")


def fmt(value):
    """Format a number with 17 significant digits (ints and strings unchanged)."""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "%.17g" % float(value)
    return str(value)


def rows_to_csv(header, rows):
    """CSV text with a fixed header and ``\\n`` line endings."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def trajectory_csv(traj):
    return rows_to_csv(TRAJECTORY_HEADER, traj.rows())


def write_text(path, text):
    with open(path, "w", newline="") as fh:
        fh.write(text)


def write_trajectory(path, traj):
    write_text(path, trajectory_csv(traj))


def read_trajectory(path):
    """Columns of a trajectory CSV as a dict of float arrays."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != TRAJECTORY_HEADER:
            raise ValueError(f"unexpected trajectory header {header}")
        data = np.array([[float(v) for v in row] for row in reader], dtype=float).reshape(-1, len(header))
    return {name: data[:, k] for k, name in enumerate(header)}


def snapshots_text(snapshots):
    """Render ``[(t, matrix_or_vector), ...]`` in the snapshot text format."""
    out = []
    for t, data in snapshots:
        mat = np.atleast_2d(np.asarray(data, dtype=np.complex128))
        out.append(f"# snapshot t={fmt(float(t))} rows={mat.shape[0]} cols={mat.shape[1]}")
        for row in mat:
            out.append(" ".join(f"{fmt(v.real)} {fmt(v.imag)}" for v in row))
    return "\n".join(out) + ("\n" if out else "")


def parse_snapshots(text):
    """Inverse of :func:`snapshots_text`."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    out, k = [], 0
    while k < len(lines):
        head = lines[k]
        if not head.startswith("# snapshot"):
            raise ValueError(f"expected snapshot header, got {head!r}")
        fields = dict(part.split("=") for part in head.split()[2:])
        rows, cols = int(fields["rows"]), int(fields["cols"])
        mat = np.empty((rows, cols), dtype=np.complex128)
        for r in range(rows):
            nums = np.array(lines[k + 1 + r].split(), dtype=float)
            mat[r] = nums[0::2] + 1j * nums[1::2]
        out.append((float(fields["t"]), mat))
        k += rows + 1
    return out
