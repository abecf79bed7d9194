# content addressing: CIDs, chunking, the embedded blob store
from aquasim.cas import BlobStore, Cid, add_file, cid_of_blob, get_file, chunk_bytes

cid = cid_of_blob(b"hello")
print(cid)                 # bafkrei... CIDv1, raw codec, sha2-256, base32
print(len(cid.to_bytes())) # 36 bytes on the wire
print(Cid.parse(str(cid)) == cid)

# small files are a single raw blob
store = BlobStore()
root = add_file(store, b"M00001,2024-01-01T00:00:00Z,1.500\n", pin=True)
print(root == cid_of_blob(b"M00001,2024-01-01T00:00:00Z,1.500\n"))

# big ones get 256 KiB chunks plus a manifest
big = bytes(range(256)) * 4000   # ~1 MB
root = add_file(store, big)
print(hex(root.codec), len(chunk_bytes(big)), "chunks")
print(get_file(store, root) == big)
print(len(store), "blobs stored")
