from mesosim.vehicle import Vehicle


def make_vehicle(**kw):
    base = dict(
        trip_id=5, origin=1, dest=4, depart_us=1000, reroutable=True, path=(10, 11, 12)
    )
    base.update(kw)
    return Vehicle(**base)


def test_link_accessors():
    v = make_vehicle()
    assert v.current_link == 10
    assert v.next_link == 11
    assert not v.on_last_link
    last = v.advanced().advanced()
    assert last.current_link == 12
    assert last.next_link is None
    assert last.on_last_link


def test_advanced_only_moves_position():
    v = make_vehicle()
    w = v.advanced()
    assert w.pos == v.pos + 1
    assert w._replace(pos=v.pos) == v


def test_with_tail_splices_and_counts_reroute():
    v = make_vehicle().advanced()  # on link 11
    w = v.with_tail((20, 21))
    assert w.path == (10, 11, 20, 21)
    assert w.pos == v.pos
    assert w.reroutes == v.reroutes + 1
    assert w.dest == v.dest
    assert w._replace(path=v.path, reroutes=v.reroutes) == v


def test_moved_and_checked():
    v = make_vehicle()
    assert v.moved(123.5).dist_m == 123.5
    assert v.checked(77).last_check_us == 77
    assert v.moved(123.5)._replace(dist_m=v.dist_m) == v
    assert v.checked(77)._replace(last_check_us=v.last_check_us) == v


def test_replace_passthrough():
    v = make_vehicle()
    assert v.replace(pos=2) == v._replace(pos=2)
