/*
 * Copyright 2026 The tesim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "tesim/tensor_io.hpp"

#include <array>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace tesim {

namespace {

constexpr std::array<char, 5> kTensorMagic{'P', 'T', 'E', 'A', '1'};
constexpr std::array<char, 5> kWeightsMagic{'P', 'T', 'E', 'A', 'W'};

template <class U>
void put(std::ostream& out, U v) {
    for (std::size_t i = 0; i < sizeof(U); ++i) {
        out.put(static_cast<char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xFF));
    }
}

template <class U>
U get(std::istream& in) {
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
        const int c = in.get();
        if (c == std::char_traits<char>::eof()) throw FormatError("unexpected end of file");
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * i);
    }
    return static_cast<U>(v);
}

void expect_magic(std::istream& in, const std::array<char, 5>& magic) {
    std::array<char, 5> got{};
    in.read(got.data(), got.size());
    if (!in || got != magic) {
        throw FormatError("bad magic, expected " + std::string(magic.begin(), magic.end()));
    }
}

void write_body(std::ostream& out, const FxTensor& t) {
    if (t.dims().size() > 255) throw FormatError("tensor rank exceeds 255");
    put<std::uint8_t>(out, static_cast<std::uint8_t>(t.dims().size()));
    for (auto d : t.dims()) {
        if (d > UINT32_MAX) throw FormatError("tensor dimension exceeds u32");
        put<std::uint32_t>(out, static_cast<std::uint32_t>(d));
    }
    put<std::uint8_t>(out, static_cast<std::uint8_t>(t.format.width_bits));
    put<std::uint8_t>(out, static_cast<std::uint8_t>(t.format.frac_bits));
    for (Raw r : t.raws.data) {
        if (t.format.width_bits == 8) {
            put<std::uint8_t>(out, static_cast<std::uint8_t>(static_cast<std::int8_t>(r)));
        } else {
            put<std::uint16_t>(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(r)));
        }
    }
}

FxTensor read_body(std::istream& in) {
    const auto rank = get<std::uint8_t>(in);
    Dims dims(rank);
    for (auto& d : dims) d = get<std::uint32_t>(in);
    FixedFormat f;
    f.width_bits = get<std::uint8_t>(in);
    f.frac_bits = get<std::uint8_t>(in);
    if (!f.valid()) throw FormatError("invalid fixed-point format " + f.name());
    FxTensor t(dims, f);
    for (auto& r : t.raws.data) {
        r = f.width_bits == 8 ? Raw{static_cast<std::int8_t>(get<std::uint8_t>(in))}
                              : Raw{static_cast<std::int16_t>(get<std::uint16_t>(in))};
    }
    return t;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot open " + path + " for writing");
    return out;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path);
    return in;
}

}  // namespace

void write_tensor(std::ostream& out, const FxTensor& t) {
    out.write(kTensorMagic.data(), kTensorMagic.size());
    write_body(out, t);
}

FxTensor read_tensor(std::istream& in) {
    expect_magic(in, kTensorMagic);
    return read_body(in);
}

void save_tensor(const std::string& path, const FxTensor& t) {
    auto out = open_out(path);
    write_tensor(out, t);
    if (!out) throw FormatError("write failed: " + path);
}

FxTensor load_tensor(const std::string& path) {
    auto in = open_in(path);
    return read_tensor(in);
}

void write_weights(std::ostream& out, const FxWeights& w) {
    std::vector<std::pair<std::string, const FxTensor*>> entries;
    for_each_parameter(w, [&](const std::string& name, const FxTensor& t) { entries.emplace_back(name, &t); });
    out.write(kWeightsMagic.data(), kWeightsMagic.size());
    put<std::uint16_t>(out, kWeightContainerVersion);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(entries.size()));
    for (const auto& [name, t] : entries) {
        put<std::uint16_t>(out, static_cast<std::uint16_t>(name.size()));
        out.write(name.data(), static_cast<std::streamsize>(name.size()));
        write_body(out, *t);
    }
}

FxWeights read_weights(std::istream& in, const ModelConfig& m, FixedFormat f) {
    expect_magic(in, kWeightsMagic);
    const auto version = get<std::uint16_t>(in);
    if (version != kWeightContainerVersion) {
        throw FormatError("unsupported weight container version " + std::to_string(version));
    }
    const auto count = get<std::uint32_t>(in);
    std::map<std::string, FxTensor> loaded;
    for (std::uint32_t i = 0; i < count; ++i) {
        const auto len = get<std::uint16_t>(in);
        std::string name(len, '\0');
        in.read(name.data(), len);
        if (!in) throw FormatError("unexpected end of file");
        auto t = read_body(in);
        if (!loaded.emplace(name, std::move(t)).second) throw FormatError("duplicate tensor " + name);
    }
    FxWeights w = make_fx_weights(m, f);
    std::size_t used = 0;
    for_each_parameter(w, [&](const std::string& name, FxTensor& slot) {
        auto it = loaded.find(name);
        if (it == loaded.end()) throw FormatError("missing tensor " + name);
        if (it->second.dims() != slot.dims()) {
            throw ShapeError(name + ": expected " + dims_to_string(slot.dims()) + ", got " +
                             dims_to_string(it->second.dims()));
        }
        if (it->second.format != f) {
            throw FormatError(name + ": expected " + f.name() + ", got " + it->second.format.name());
        }
        slot = std::move(it->second);
        ++used;
    });
    if (used != loaded.size()) throw FormatError("weight container has unexpected tensors");
    return w;
}

void save_weights(const std::string& path, const FxWeights& w) {
    auto out = open_out(path);
    write_weights(out, w);
    if (!out) throw FormatError("write failed: " + path);
}

FxWeights load_weights(const std::string& path, const ModelConfig& m, FixedFormat f) {
    auto in = open_in(path);
    return read_weights(in, m, f);
}

std::string tensor_digest(const FxTensor& t) {
    std::ostringstream ss;
    write_tensor(ss, t);
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : ss.str()) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace tesim
