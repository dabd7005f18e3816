#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ecgssl/rng.hpp"
#include "ecgssl/signal.hpp"

namespace ecgssl {

/// One dataset entry of the on-disk corpus format.
struct ManifestEntry {
    std::string id;
    Label label = Label::Unlabeled;
    int fs = kDefaultFs;
    std::string path;  // relative to the manifest's directory
};

struct Manifest {
    std::filesystem::path dir;
    std::vector<ManifestEntry> entries;

    const ManifestEntry& find(const std::string& id) const {
        for (const auto& e : entries)
            if (e.id == id) return e;
        throw MissingFileError("manifest has no entry with id " + id);
    }
};

inline constexpr const char* kManifestHeader = "id,label,fs,path";
inline constexpr const char* kManifestName = "manifest.csv";

namespace detail {

inline std::vector<Real> read_f32le(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingFileError("cannot open sample file " + path.string());
    in.seekg(0, std::ios::end);
    const std::streamoff size = in.tellg();
    in.seekg(0);
    if (size % 4 != 0)
        throw BadBinaryFileError("sample file size not a multiple of 4: " + path.string());
    std::vector<Real> out(static_cast<std::size_t>(size / 4));
    if (!out.empty()) {
        static_assert(sizeof(Real) == 4);
        in.read(reinterpret_cast<char*>(out.data()), size);
        if (!in) throw BadBinaryFileError("short read on " + path.string());
    }
    if constexpr (std::endian::native == std::endian::big) {
        for (Real& v : out) {
            std::uint32_t bits;
            std::memcpy(&bits, &v, 4);
            bits = __builtin_bswap32(bits);
            std::memcpy(&v, &bits, 4);
        }
    }
    return out;
}

inline std::vector<Real> read_txt(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw MissingFileError("cannot open sample file " + path.string());
    std::vector<Real> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            std::size_t pos = 0;
            const float v = std::stof(line, &pos);
            while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\r')) ++pos;
            if (pos != line.size()) throw std::invalid_argument("trailing");
            out.push_back(v);
        } catch (const std::exception&) {
            throw BadTextValueError("non-numeric value at " + path.string() + ":" +
                                    std::to_string(lineno));
        }
    }
    return out;
}

} // namespace detail

/// Parses manifest.csv (header `id,label,fs,path`). Duplicate ids are a
/// distinct error; referenced files are checked for existence.
inline Manifest read_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw MissingFileError("cannot open manifest " + path.string());
    Manifest m;
    m.dir = path.parent_path();
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty manifest " + path.string());
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kManifestHeader)
        throw DataError("bad manifest header, expected '" + std::string(kManifestHeader) + "'");
    std::set<std::string> seen;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::stringstream ss(line);
        ManifestEntry e;
        std::string fs_field;
        if (!std::getline(ss, e.id, ',')) throw DataError("bad manifest row " + std::to_string(lineno));
        std::string label_field;
        if (!std::getline(ss, label_field, ',')) throw DataError("bad manifest row " + std::to_string(lineno));
        if (!std::getline(ss, fs_field, ',')) throw DataError("bad manifest row " + std::to_string(lineno));
        if (!std::getline(ss, e.path)) throw DataError("bad manifest row " + std::to_string(lineno));
        e.label = label_from_name(label_field);
        e.fs = std::stoi(fs_field);
        if (e.fs <= 0) throw DataError("non-positive fs in manifest row " + std::to_string(lineno));
        if (!seen.insert(e.id).second) throw DuplicateIdError("duplicate id in manifest: " + e.id);
        if (!std::filesystem::exists(m.dir / e.path))
            throw MissingFileError("manifest references missing file " + (m.dir / e.path).string());
        m.entries.push_back(std::move(e));
    }
    return m;
}

/// Loads one record; `.txt` files hold one decimal per line, everything
/// else is raw little-endian float32.
inline EcgRecord load_record(const Manifest& m, const std::string& id) {
    const ManifestEntry& e = m.find(id);
    EcgRecord rec;
    rec.id = e.id;
    rec.fs = e.fs;
    rec.label = e.label;
    const std::filesystem::path p = m.dir / e.path;
    rec.samples = (p.extension() == ".txt") ? detail::read_txt(p) : detail::read_f32le(p);
    if (rec.samples.empty()) throw DataError("record " + id + " has no samples");
    return rec;
}

inline std::vector<EcgRecord> load_all_records(const Manifest& m) {
    std::vector<EcgRecord> out;
    out.reserve(m.entries.size());
    for (const auto& e : m.entries) out.push_back(load_record(m, e.id));
    return out;
}

/// Writes records as `.f32le` files plus manifest.csv. Binary round-trips
/// bit-exactly. Set `text_format` for the decimal `.txt` variant.
inline Manifest write_corpus(const std::vector<EcgRecord>& records,
                             const std::filesystem::path& dir, bool text_format = false) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    Manifest m;
    m.dir = dir;
    std::ofstream mout(dir / kManifestName);
    if (!mout) throw DataError("cannot write manifest in " + dir.string());
    mout << kManifestHeader << "\n";
    for (const EcgRecord& r : records) {
        ManifestEntry e;
        e.id = r.id;
        e.label = r.label;
        e.fs = r.fs;
        e.path = r.id + (text_format ? ".txt" : ".f32le");
        const std::filesystem::path p = dir / e.path;
        if (text_format) {
            std::ofstream out(p);
            if (!out) throw DataError("cannot write " + p.string());
            out.precision(9);
            for (Real v : r.samples) out << v << "\n";
        } else {
            std::ofstream out(p, std::ios::binary);
            if (!out) throw DataError("cannot write " + p.string());
            static_assert(sizeof(Real) == 4);
            out.write(reinterpret_cast<const char*>(r.samples.data()),
                      static_cast<std::streamsize>(r.samples.size() * 4));
        }
        mout << e.id << ',' << label_name(e.label) << ',' << e.fs << ',' << e.path << "\n";
        m.entries.push_back(std::move(e));
    }
    // Annotations ride along in a sidecar so synthetic ground truth survives
    // the round trip; absent for externally converted data.
    std::ofstream aout(dir / "annotations.csv");
    aout << "id,r_peak_s\n";
    aout.precision(9);
    for (const EcgRecord& r : records)
        for (double t : r.annotations) aout << r.id << ',' << t << "\n";
    return m;
}

/// Loads the optional annotations sidecar into the records (by id).
inline void load_annotations(const Manifest& m, std::vector<EcgRecord>& records) {
    std::ifstream in(m.dir / "annotations.csv");
    if (!in) return;
    std::map<std::string, std::vector<double>> ann;
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const std::size_t comma = line.find(',');
        if (comma == std::string::npos) continue;
        ann[line.substr(0, comma)].push_back(std::stod(line.substr(comma + 1)));
    }
    for (EcgRecord& r : records) {
        auto it = ann.find(r.id);
        if (it != ann.end()) r.annotations = it->second;
    }
}

/// A segment together with its downstream label (0 = Normal, 1 = AF).
struct LabeledSegment {
    Segment segment;
    int label = 0;
};

enum class SplitLevel { Record, Segment };

struct SplitSpec {
    std::size_t n_train = 0;
    std::optional<std::size_t> n_per_class;
    std::uint64_t seed = 0;
    SplitLevel level = SplitLevel::Record;
};

struct Split {
    std::vector<LabeledSegment> train;
    std::vector<LabeledSegment> test;
};

namespace detail {

// Record-level draw: whole records are consumed until the target count is
// reached; surplus segments of the last record are discarded rather than
// leaked into the test side.
inline void take_record_level(const std::vector<LabeledSegment>& pool, std::size_t want,
                              const std::vector<std::string>& record_order, Split& out) {
    std::set<std::string> train_ids;
    std::size_t got = 0;
    for (const std::string& rid : record_order) {
        if (got >= want) break;
        train_ids.insert(rid);
        for (const auto& ls : pool)
            if (ls.segment.source_id == rid) ++got;
    }
    std::size_t placed = 0;
    for (const auto& ls : pool) {
        if (train_ids.count(ls.segment.source_id)) {
            if (placed < want) {
                out.train.push_back(ls);
                ++placed;
            }
            // surplus segments of a train record are dropped
        } else {
            out.test.push_back(ls);
        }
    }
}

} // namespace detail

/// Seeded, deterministic split. Record level keeps all segments of one
/// record on the same side (overlapping windows leak otherwise); when
/// n_per_class is set the train side is balanced.
inline Split split(const std::vector<LabeledSegment>& segments, const SplitSpec& spec) {
    Split out;
    Rng rng(spec.seed);

    if (spec.level == SplitLevel::Segment) {
        std::vector<std::size_t> order(segments.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        rng.shuffle(order);
        if (spec.n_per_class) {
            std::size_t need[2] = {*spec.n_per_class, *spec.n_per_class};
            for (std::size_t i : order) {
                const int l = segments[i].label;
                if (need[l] > 0) {
                    out.train.push_back(segments[i]);
                    --need[l];
                } else {
                    out.test.push_back(segments[i]);
                }
            }
            if (need[0] > 0 || need[1] > 0)
                throw DataError("split: not enough segments for the requested per-class count");
        } else {
            if (spec.n_train > segments.size())
                throw DataError("split: not enough segments for the requested train size");
            for (std::size_t k = 0; k < order.size(); ++k)
                (k < spec.n_train ? out.train : out.test).push_back(segments[order[k]]);
        }
        return out;
    }

    // Record level: shuffle record ids, then consume whole records.
    std::vector<std::string> ids;
    std::map<std::string, int> label_of;
    for (const auto& ls : segments) {
        if (!label_of.count(ls.segment.source_id)) {
            ids.push_back(ls.segment.source_id);
            label_of[ls.segment.source_id] = ls.label;
        }
    }
    rng.shuffle(ids);

    if (spec.n_per_class) {
        Split part[2];
        for (int cls = 0; cls < 2; ++cls) {
            std::vector<std::string> cls_ids;
            for (const auto& id : ids)
                if (label_of[id] == cls) cls_ids.push_back(id);
            std::vector<LabeledSegment> cls_pool;
            for (const auto& ls : segments)
                if (ls.label == cls) cls_pool.push_back(ls);
            detail::take_record_level(cls_pool, *spec.n_per_class, cls_ids, part[cls]);
            if (part[cls].train.size() < *spec.n_per_class)
                throw DataError("split: not enough segments for the requested per-class count");
        }
        for (int cls = 0; cls < 2; ++cls) {
            out.train.insert(out.train.end(), part[cls].train.begin(), part[cls].train.end());
            out.test.insert(out.test.end(), part[cls].test.begin(), part[cls].test.end());
        }
        return out;
    }

    detail::take_record_level(segments, spec.n_train, ids, out);
    if (out.train.size() < spec.n_train)
        throw DataError("split: not enough segments for the requested train size");
    return out;
}

/// All labeled segments of a corpus directory: load records, window,
/// normalize, drop degenerates and unlabeled records.
inline std::vector<LabeledSegment> load_labeled_segments(const Manifest& m,
                                                         int window = kSegmentLength,
                                                         int stride = kSegmentStride) {
    std::vector<LabeledSegment> out;
    for (const auto& e : m.entries) {
        if (e.label == Label::Unlabeled) continue;
        const EcgRecord rec = load_record(m, e.id);
        for (Segment& s : segment_normalized(rec, true, window, stride))
            out.push_back({std::move(s), e.label == Label::AF ? 1 : 0});
    }
    return out;
}

/// Unlabeled view of a corpus for pretraining: segments only, labels never
/// touch the pretraining path.
inline std::vector<Segment> load_unlabeled_segments(const Manifest& m,
                                                    int window = kSegmentLength,
                                                    int stride = kSegmentStride) {
    std::vector<Segment> out;
    for (const auto& e : m.entries) {
        const EcgRecord rec = load_record(m, e.id);
        for (Segment& s : segment_normalized(rec, true, window, stride)) out.push_back(std::move(s));
    }
    return out;
}

} // namespace ecgssl
