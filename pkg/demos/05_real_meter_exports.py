# reading a utility export with different column names
from aquasim.ingest import ColumnMap, encode_meter_csv, is_cumulative, parse_meter_csv

export = b"""DeviceId,Timestamp,Volume_kL,Quality
WM-0192,2023-07-01T00:00:00+10:00,1043.211,A
WM-0192,2023-07-01T01:00:00+10:00,1043.260,A
WM-0192,2023-07-01T02:00:00+10:00,,E
WM-0193,2023-07-01T00:00:00+10:00,88.004,A
"""
cols = ColumnMap(meter="DeviceId", time="Timestamp", reading="Volume_kL")
res = parse_meter_csv(export, cols)
print(len(res.readings), "readings")
for e in res.errors:
    print("line", e.line, e.reason)
print(is_cumulative(res.readings))

# normalised form, UTC timestamps, ready to anchor
print(encode_meter_csv(res.readings).decode())
