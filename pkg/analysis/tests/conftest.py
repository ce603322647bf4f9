"""Fixture CSVs matching the simulator's documented output schemas."""

import pytest

SWEEP_CSV = """\
axis_value,vhd_h,vmt,reroutes,lsus,checks,runtime_s
0,44.035103,3311.518275,0,764,0,2.104
0.25,40.128771,3309.402118,55,598,371,2.267
0.5,36.350364,3305.271091,90,520,736,2.391
0.75,35.903551,3314.092860,131,486,1081,2.488
1,35.470252,3316.805668,174,455,1408,2.603
"""

TRIPS_CSV = """\
trip_id,depart_s,arrive_s,freespeed_s,distance_m,reroutes
0,12.500000,452.000000,380.000000,2200.0,0
1,30.000000,800.250000,420.000000,2400.0,1
2,45.125000,512.375000,400.000000,2200.0,0
3,90.000000,1400.000000,360.000000,2000.0,2
4,120.000000,640.500000,500.000000,2800.0,0
5,150.000000,1250.750000,440.000000,2400.0,1
"""

REROUTES_CSV = """\
time_s,vehicle_id,controller_id,decision,old_cost_s,new_cost_s
100.000000,3,360,switch,900.000000,700.000000
340.000000,1,361,keep,650.000000,650.000000
3700.000000,5,360,switch,880.000000,640.000000
3900.000000,3,362,switch,910.000000,705.000000
7300.000000,1,361,switch,870.000000,660.000000
"""

NODES_CSV = """\
id,x,y,pop_weight
0,0.0,0.0,1.0
1,200.0,0.0,1.0
2,0.0,200.0,1.0
3,200.0,200.0,1.0
"""

LINKS_CSV = """\
id,from,to,length_m,lanes,freespeed_mps,capacity_vph,fclass,signalized
0,0,1,200.0,1,10.0,600.0,3,0
1,1,0,200.0,1,10.0,600.0,3,0
2,0,2,200.0,1,10.0,600.0,3,0
3,2,3,200.0,1,10.0,600.0,5,0
"""

DELTAS_CSV = """\
link_id,delta
0,12
1,-7
2,0
3,3
"""


@pytest.fixture
def fixtures(tmp_path):
    files = {
        "sweep": SWEEP_CSV,
        "trips": TRIPS_CSV,
        "reroutes": REROUTES_CSV,
        "nodes": NODES_CSV,
        "links": LINKS_CSV,
        "deltas": DELTAS_CSV,
    }
    out = {}
    for name, text in files.items():
        path = tmp_path / f"{name}.csv"
        path.write_text(text)
        out[name] = str(path)
    out["dir"] = tmp_path
    return out
