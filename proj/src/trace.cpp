#include "snrbeam/trace.hpp"

#include <cstring>

namespace snrbeam {

namespace {

void digest_bytes(std::uint64_t& h, const void* data, std::size_t len) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL; // FNV-1a
    }
}

void digest_mat(std::uint64_t& h, const CMat& m) {
    const idx dims[2] = {m.rows(), m.cols()};
    digest_bytes(h, dims, sizeof dims);
    digest_bytes(h, m.data(), static_cast<std::size_t>(m.size()) * sizeof(cd));
}

} // namespace

std::uint64_t state_digest(const BeamformerState& state) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const CMat& f : state.precoders) digest_mat(h, f);
    digest_mat(h, state.postcoder);
    return h;
}

} // namespace snrbeam
