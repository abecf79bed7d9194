# run the network simulator directly, then the four benchmark scenarios
from aquasim import bench
from aquasim.anchor import make_raw_tx
from aquasim.netsim import SimConfig, audit, run_simulation

# 300 raw 16 KiB files, 100 per block, on 5 validators
txs = [make_raw_tx(f"m{i}", bytes(16384)) for i in range(300)]
res = run_simulation(SimConfig(n_nodes=5, max_block_txs=100, seed=1), txs)
for block, rec in res.finalized:
    h = block.header
    print(h.number, "slot", h.slot, "author", h.author, len(block.body), "txs",
          block.size, "bytes, final at", rec.finalized_at_ms, "ms")
print("violations:", audit(res))

# make imports slow enough to miss slots
slow = SimConfig(n_nodes=5, max_block_txs=100, exec_per_kb_ms=5.0, seed=1)
print([b.header.slot for b, _ in run_simulation(slow, txs).finalized])

# scenario C is the RAW node-fixed scan: 50..800 files per block at 10 nodes
rows = bench.run_scenario(bench.scenario("C", runs=2))
by_load = {}
for r in rows:
    by_load.setdefault(r.tx_target, set()).add(r.block_time_s)
for load, times in sorted(by_load.items()):
    print(load, sorted(times))
print("size trend", bench.size_trend(rows))
