"""Simulator and benchmark harness for a proof-of-authority chain that stores
smart-water-meter data on-chain (RAW) or anchors content-addressed copies
(ANCHOR)."""

from .anchor import (AnchorRecord, ChainState, apply_extrinsic, make_anchor_tx,
                     make_raw_tx, verify_anchor)
from .cas import (BlobStore, Cid, add_file, chunk_bytes, cid_of_blob, get_file,
                  remote_add, remote_cat)
from .chain import (Block, BlockHeader, Extrinsic, TxKind, Violation, author_for_slot,
                    build_block, compute_extrinsics_root, decode_extrinsic,
                    encode_extrinsic, hash_header, validate_block)
from .netsim import FinalityRecord, SimConfig, block_time_of, run_simulation
from .stats import TTestResult, mean_and_variance, student_t_cdf, welch_t

__version__ = "0.1.0"
