"""CSV export helpers: one header row, comma-separated, 9 significant digits."""

from __future__ import annotations

from pathlib import Path


def fmt(value) -> str:
    if isinstance(value, (int,)) and not isinstance(value, bool):
        return str(value)
    return f"{float(value):.9g}"


def write_csv(path, header, rows) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def read_csv(path):
    """Returns (header, rows-of-floats); tolerant only of the format we write."""
    lines = Path(path).read_text().strip().splitlines()
    header = lines[0].split(",")
    rows = [[float(v) for v in line.split(",")] for line in lines[1:]]
    return header, rows


def export_cl_cd(path, t, cd, cl, n_pe: int) -> None:
    """cl_cd.csv: (t, per-pe Cd, Cl); 2D slices replicate one trace."""
    header = ["t"]
    for j in range(n_pe):
        header += [f"cd_pe{j}", f"cl_pe{j}"]
    rows = []
    for k in range(len(t)):
        row = [t[k]]
        for _ in range(n_pe):
            row += [cd[k], cl[k]]
        rows.append(row)
    write_csv(path, header, rows)


def export_action(path, t, q_matrix) -> None:
    """action.csv: (t, per-pe applied Q) sampled at every solver step."""
    n_pe = q_matrix.shape[1]
    write_csv(
        path,
        ["t"] + [f"q_pe{j}" for j in range(n_pe)],
        [[t[k], *q_matrix[k]] for k in range(len(t))],
    )
