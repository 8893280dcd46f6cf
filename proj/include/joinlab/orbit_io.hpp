#pragma once

// Binary dataset cache. Layout (all little-endian):
//   magic "JLAB", u16 version = 1,
//   u16 k, u16 rank, u16 max word length, f64 displacement cap,
//   u64 point count, u8 factor kind per factor, u8 bits per letter,
//   then columnar arrays: mu (k arrays of f64), |mu| (f64),
//   loxodromic flags (u8), boundary coordinates (per factor, dim * f64
//   interleaved per point), and length-prefixed packed words.
// Round-trips are bit-exact.

#include <string>
#include <vector>

#include "joinlab/orbit.hpp"

namespace joinlab {

std::vector<uint8_t> serialize_dataset(const OrbitDataset& data);

// rep supplies the generator matrices (the cache stores only what the
// estimators consume); header fields are validated against it.
OrbitDataset deserialize_dataset(const std::vector<uint8_t>& bytes,
                                 const RepresentationSpec& rep);

void save_dataset(const std::string& path, const OrbitDataset& data);
OrbitDataset load_dataset(const std::string& path, const RepresentationSpec& rep);

// FNV-1a content hash of the serialized bytes, hex-encoded.
std::string dataset_fingerprint(const OrbitDataset& data);

}  // namespace joinlab
