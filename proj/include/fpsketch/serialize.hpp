#pragma once

#include <bit>
#include <complex>
#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "fpsketch/errors.hpp"

namespace fpsketch {

static_assert(std::endian::native == std::endian::little,
              "serialized blobs are little-endian; big-endian hosts are unsupported");

class BlobWriter {
public:
    void u32(uint32_t v) { raw(&v, sizeof v); }
    void u64(uint64_t v) { raw(&v, sizeof v); }
    void f64(double v) { raw(&v, sizeof v); }
    void magic(const char m[4]) { raw(m, 4); }
    void f64_span(const double* p, size_t count) { raw(p, count * sizeof(double)); }
    void c128_span(const std::complex<double>* p, size_t count) { raw(p, count * sizeof(std::complex<double>)); }

    const std::vector<uint8_t>& bytes() const { return buf_; }
    std::vector<uint8_t> take() { return std::move(buf_); }

private:
    void raw(const void* p, size_t len) {
        const auto* b = static_cast<const uint8_t*>(p);
        buf_.insert(buf_.end(), b, b + len);
    }
    std::vector<uint8_t> buf_;
};

class BlobReader {
public:
    BlobReader(const uint8_t* data, size_t size) : data_(data), size_(size) {}
    explicit BlobReader(const std::vector<uint8_t>& v) : BlobReader(v.data(), v.size()) {}

    uint32_t u32() { return read<uint32_t>(); }
    uint64_t u64() { return read<uint64_t>(); }
    double f64() { return read<double>(); }

    void expect_magic(const char m[4]) {
        char got[4];
        raw(got, 4);
        if (std::memcmp(got, m, 4) != 0) throw ParseError("bad magic in sketch blob");
    }
    void f64_span(double* p, size_t count) { raw(p, count * sizeof(double)); }
    void c128_span(std::complex<double>* p, size_t count) { raw(p, count * sizeof(std::complex<double>)); }

    size_t remaining() const { return size_ - pos_; }

private:
    template <typename T>
    T read() {
        T v;
        raw(&v, sizeof v);
        return v;
    }
    void raw(void* p, size_t len) {
        if (pos_ + len > size_) throw ParseError("truncated sketch blob");
        std::memcpy(p, data_ + pos_, len);
        pos_ += len;
    }
    const uint8_t* data_;
    size_t size_;
    size_t pos_ = 0;
};

}  // namespace fpsketch
