import csv

import pytest

from mesoplot import heatmap, penetration, reroutes, sweep, travel_times
from mesoplot.common import PlotError, read_rows


def rows_of(path):
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


def test_read_rows_names_missing_columns(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("a,b\n1,2\n")
    with pytest.raises(PlotError, match="missing column\\(s\\): c, d"):
        read_rows(path, ["a", "c", "d"])


def test_read_rows_rejects_empty_file(tmp_path):
    path = tmp_path / "empty.csv"
    path.write_text("axis_value,vhd_h\n")
    with pytest.raises(PlotError, match="no data rows"):
        read_rows(path, ["axis_value"])


def test_missing_metric_is_an_error_and_writes_nothing(fixtures, capsys):
    out = fixtures["dir"] / "x.png"
    rc = sweep.main(["--in", fixtures["sweep"], "--out", str(out), "--metrics", "vhd_h,bogus"])
    assert rc == 1
    assert not out.exists()
    assert "bogus" in capsys.readouterr().err


def test_empty_sweep_is_an_error_and_writes_nothing(fixtures, capsys):
    empty = fixtures["dir"] / "empty.csv"
    empty.write_text("axis_value,vhd_h,reroutes,lsus,checks,vmt,runtime_s\n")
    out = fixtures["dir"] / "y.png"
    assert sweep.main(["--in", str(empty), "--out", str(out)]) == 1
    assert not out.exists()
    assert "no data rows" in capsys.readouterr().err


def test_sweep_single_metric_panel(fixtures):
    fig, lines = sweep.build_figure(rows_of(fixtures["sweep"]), ["vmt"])
    assert set(lines) == {"vmt"}
    assert len(lines["vmt"].get_ydata()) == 5


def test_penetration_sorts_by_axis_value(fixtures):
    rows = rows_of(fixtures["sweep"])[::-1]  # shuffled input order
    _, lines = penetration.build_figure(rows)
    xs = list(lines["vhd_h"].get_xdata())
    assert xs == sorted(xs)


def test_hourly_counts_recount():
    rows = [
        {"time_s": "10.0", "decision": "switch"},
        {"time_s": "3599.9", "decision": "switch"},
        {"time_s": "3600.0", "decision": "switch"},
        {"time_s": "100.0", "decision": "keep"},
    ]
    hours, counts = reroutes.hourly_counts(rows)
    assert hours == [0, 1]
    assert counts == [2, 1]


def test_hourly_counts_without_switches():
    hours, counts = reroutes.hourly_counts([{"time_s": "5.0", "decision": "keep"}])
    assert hours == [0]
    assert counts == [0]


def test_travel_times_bin_edges_span_data(fixtures):
    rows = rows_of(fixtures["trips"])
    _, hist = travel_times.build_figure(rows, bins=10)
    actual, free = travel_times.minutes(rows)
    assert hist["edges"][0] == min(actual + free)
    assert hist["edges"][-1] == max(actual + free)
    assert len(hist["actual"]) == 10


def test_heatmap_rejects_unknown_link_and_node(fixtures):
    nodes, links = heatmap.load_geometry(fixtures["nodes"], fixtures["links"])
    with pytest.raises(PlotError, match="unknown link 99"):
        heatmap.build_figure({99: 1}, nodes, links)
    bad_nodes = {nid: xy for nid, xy in nodes.items() if nid != 3}
    with pytest.raises(PlotError, match="references unknown node 3"):
        heatmap.build_figure({3: 1}, bad_nodes, links)


def test_heatmap_all_zero_deltas_render_neutral(fixtures):
    nodes, links = heatmap.load_geometry(fixtures["nodes"], fixtures["links"])
    _, lc = heatmap.build_figure({lid: 0 for lid in links}, nodes, links)
    for value in lc.get_array():
        r, g, b, _a = lc.to_rgba(value)
        # neutral up to the colormap's one-LUT-step asymmetry at the midpoint
        assert max(r, g, b) - min(r, g, b) < 0.01
        assert min(r, g, b) > 0.95


def test_heatmap_cli_propagates_geometry_errors(fixtures, capsys):
    deltas = fixtures["dir"] / "bad_deltas.csv"
    deltas.write_text("link_id,delta\n77,1\n")
    out = fixtures["dir"] / "hm.png"
    rc = heatmap.main(["--in", str(deltas), "--nodes", fixtures["nodes"],
                       "--links", fixtures["links"], "--out", str(out)])
    assert rc == 1
    assert not out.exists()
    assert "unknown link 77" in capsys.readouterr().err
