import pytest

from mesosim.network import (
    GRID_PROFILES,
    Graph,
    Link,
    NetworkError,
    Node,
    SignalPlan,
    load_network,
    make_grid,
    save_network,
)
from mesosim.timebase import to_us


def grid_link_count(rows, cols):
    return 2 * (rows * (cols - 1) + cols * (rows - 1))


def test_make_grid_counts():
    g = make_grid(4, 5)
    assert len(g.nodes) == 20
    assert len(g.links) == grid_link_count(4, 5)


def test_make_grid_node_coordinates():
    g = make_grid(3, 3, block_m=150.0)
    assert (g.nodes[0].x, g.nodes[0].y) == (0.0, 0.0)
    assert (g.nodes[8].x, g.nodes[8].y) == (300.0, 300.0)


def test_make_grid_default_profile_ring_vs_interior():
    g = make_grid(4, 4)
    arterial = GRID_PROFILES["default"]["arterial"]
    local = GRID_PROFILES["default"]["local"]
    # node 0 -> node 1 runs along the boundary ring; node 5 -> node 6 is interior
    ring = next(l for l in g.links.values() if (l.frm, l.to) == (0, 1))
    inner = next(l for l in g.links.values() if (l.frm, l.to) == (5, 6))
    assert (ring.lanes, ring.freespeed_mps, ring.capacity_vph, ring.fclass) == arterial
    assert (inner.lanes, inner.freespeed_mps, inner.capacity_vph, inner.fclass) == local


def test_make_grid_uniform_profile_is_homogeneous():
    g = make_grid(4, 4, 200.0, "uniform")
    attrs = {(l.lanes, l.freespeed_mps, l.capacity_vph, l.fclass) for l in g.links.values()}
    assert len(attrs) == 1


def test_make_grid_rejects_degenerate_shape():
    with pytest.raises(NetworkError):
        make_grid(1, 5)


def test_grid_is_bidirectional():
    g = make_grid(3, 3)
    pairs = {(l.frm, l.to) for l in g.links.values()}
    assert all((b, a) in pairs for a, b in pairs)


def test_link_derived_attributes():
    link = Link(0, 0, 1, 200.0, 2, 13.9, 1200.0, 3)
    assert link.tf_s == pytest.approx(200.0 / 13.9)
    assert link.tf_us == to_us(200.0 / 13.9)
    assert link.storage_cap == 53  # floor(200 * 2 / 7.5)
    assert Link(1, 0, 1, 3.0, 1, 10.0, 600.0, 3).storage_cap == 1  # floor is clamped


def test_out_and_in_links_are_id_sorted():
    g = make_grid(3, 3)
    for lids in list(g.out_links.values()) + list(g.in_links.values()):
        assert list(lids) == sorted(lids)
    for nid, lids in g.out_links.items():
        assert all(g.links[lid].frm == nid for lid in lids)


def test_save_load_roundtrip(tmp_path):
    g = make_grid(3, 4, 175.0)
    save_network(g, tmp_path / "nodes.csv", tmp_path / "links.csv")
    g2 = load_network(tmp_path / "nodes.csv", tmp_path / "links.csv")
    assert g2.nodes == g.nodes
    assert g2.links == g.links


def write_net(tmp_path, node_rows, link_rows):
    nodes = tmp_path / "nodes.csv"
    links = tmp_path / "links.csv"
    nodes.write_text("id,x,y,pop_weight\n" + "".join(r + "\n" for r in node_rows))
    links.write_text(
        "id,from,to,length_m,lanes,freespeed_mps,capacity_vph,fclass,signalized\n"
        + "".join(r + "\n" for r in link_rows)
    )
    return nodes, links


def test_load_rejects_dangling_node(tmp_path):
    nodes, links = write_net(tmp_path, ["1,0,0,1"], ["1,1,9,100,1,10,600,3,0"])
    with pytest.raises(NetworkError, match="row 2.*dangling"):
        load_network(nodes, links)


def test_load_rejects_bad_fclass(tmp_path):
    nodes, links = write_net(tmp_path, ["1,0,0,1", "2,1,0,1"], ["1,1,2,100,1,10,600,9,0"])
    with pytest.raises(NetworkError, match="functional class"):
        load_network(nodes, links)


def test_load_rejects_duplicate_link_id(tmp_path):
    nodes, links = write_net(
        tmp_path,
        ["1,0,0,1", "2,1,0,1"],
        ["1,1,2,100,1,10,600,3,0", "1,2,1,100,1,10,600,3,0"],
    )
    with pytest.raises(NetworkError, match="row 3.*duplicate"):
        load_network(nodes, links)


def test_load_rejects_negative_pop_weight(tmp_path):
    nodes, links = write_net(tmp_path, ["1,0,0,-2"], [])
    with pytest.raises(NetworkError, match="negative pop_weight"):
        load_network(nodes, links)


def test_load_rejects_non_numeric_field(tmp_path):
    nodes, links = write_net(tmp_path, ["1,0,0,1", "2,1,0,1"], ["1,1,2,abc,1,10,600,3,0"])
    with pytest.raises(NetworkError, match="links row 2"):
        load_network(nodes, links)


def write_signals(tmp_path, rows):
    path = tmp_path / "signals.csv"
    path.write_text(
        "link_id,cycle_s,maneuver_to_link,green_offset_s,green_dur_s,slots\n"
        + "".join(r + "\n" for r in rows)
    )
    return path


def test_load_signal_plan(tmp_path):
    nodes, links = write_net(
        tmp_path, ["1,0,0,1", "2,1,0,1"], ["5,1,2,100,1,10,600,3,1"]
    )
    signals = write_signals(tmp_path, ["5,60,7,10,20,2", "5,60,7,40,10,1"])
    g = load_network(nodes, links, signals)
    plan = g.links[5].plan
    assert plan.cycle_us == to_us(60)
    assert plan.windows_for(7) == ((to_us(10), to_us(20), 2), (to_us(40), to_us(10), 1))
    assert plan.windows_for(99) == ()


def test_signal_window_outside_cycle_rejected(tmp_path):
    nodes, links = write_net(tmp_path, ["1,0,0,1", "2,1,0,1"], ["5,1,2,100,1,10,600,3,1"])
    signals = write_signals(tmp_path, ["5,60,7,50,20,1"])
    with pytest.raises(NetworkError, match="outside cycle"):
        load_network(nodes, links, signals)


def test_overlapping_green_windows_rejected(tmp_path):
    nodes, links = write_net(tmp_path, ["1,0,0,1", "2,1,0,1"], ["5,1,2,100,1,10,600,3,1"])
    signals = write_signals(tmp_path, ["5,60,7,10,20,1", "5,60,7,25,10,1"])
    with pytest.raises(NetworkError, match="overlapping"):
        load_network(nodes, links, signals)


def test_inconsistent_cycle_rejected(tmp_path):
    nodes, links = write_net(tmp_path, ["1,0,0,1", "2,1,0,1"], ["5,1,2,100,1,10,600,3,1"])
    signals = write_signals(tmp_path, ["5,60,7,10,20,1", "5,90,8,10,20,1"])
    with pytest.raises(NetworkError, match="inconsistent cycle"):
        load_network(nodes, links, signals)


def test_graph_construction_from_parts():
    nodes = {1: Node(1, 0, 0), 2: Node(2, 1, 0)}
    links = {3: Link(3, 1, 2, 100.0, 1, 10.0, 600.0, 3)}
    g = Graph(nodes, links)
    assert g.out_links == {1: (3,), 2: ()}
    assert g.in_links == {1: (), 2: (3,)}
