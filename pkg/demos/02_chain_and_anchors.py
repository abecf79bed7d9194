# build a few blocks by hand and replay them into the anchor state
from aquasim.anchor import ChainState, make_anchor_tx, make_raw_tx, verify_anchor
from aquasim.cas import BlobStore, add_file
from aquasim.chain import build_block, genesis_header, validate_block
from aquasim.ingest import generate_synthetic

files = generate_synthetic(6, 100, seed=1)
store = BlobStore()

anchors = [make_anchor_tx(f.file_id, add_file(store, f.encoded, pin=True)) for f in files]
raws = [make_raw_tx(f.file_id, f.encoded) for f in files]
print("anchor tx", anchors[0].size, "bytes   raw tx", raws[0].size, "bytes")

n = 4  # validators
g = genesis_header()
b1 = build_block(g, 1, list(anchors), 16 << 20, n)
b2 = build_block(b1.header, 2, list(raws), 16 << 20, n)
print(b1.size, b2.size)                       # block bytes
print(validate_block(g, b1, n), validate_block(b1.header, b2, n))   # None, None

state = ChainState()
state.apply_block(b1)
state.apply_block(b2)
state.apply_block(b1)  # replayed block: every tx is a duplicate
print(state.record_count, "records,", state.duplicates, "duplicates,",
      state.total_onchain_bytes, "bytes on chain")

rec = state.anchors[files[0].file_id][0]
print(verify_anchor(rec, files[0].encoded))
tampered = files[0].encoded.replace(b"M000", b"M999", 1)
print(verify_anchor(rec, tampered))
