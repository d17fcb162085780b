#include "llpq/sample_io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace llpq {

using nlohmann::json;
namespace fs = std::filesystem;

static_assert(std::endian::native == std::endian::little,
              "raw files are little-endian; big-endian hosts are unsupported");

namespace {

void write_raw_f32(const fs::path& file, const float* data, std::size_t n) {
    std::ofstream out(file, std::ios::binary);
    if (!out) fail("cannot open for writing: " + file.string());
    out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n * 4));
    if (!out) fail("write failed: " + file.string());
}

std::vector<float> read_raw_f32(const fs::path& file, std::size_t expected_n) {
    std::ifstream in(file, std::ios::binary | std::ios::ate);
    if (!in) fail("missing file: " + file.string());
    const auto bytes = static_cast<std::size_t>(in.tellg());
    if (bytes != expected_n * 4)
        fail("payload size mismatch: " + file.string() + " has " + std::to_string(bytes) +
             " bytes, expected " + std::to_string(expected_n * 4));
    in.seekg(0);
    std::vector<float> data(expected_n);
    in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(bytes));
    if (!in) fail("read failed: " + file.string());
    return data;
}

Shape3 shape_from_json(const json& j) {
    if (!j.is_array() || j.size() != 3) fail("invalid shape");
    Shape3 s{};
    for (int a = 0; a < 3; ++a) {
        const std::int64_t v = j[a].get<std::int64_t>();
        if (v < 1) fail("invalid shape");
        s[a] = static_cast<std::size_t>(v);
    }
    return s;
}

json array_entry(const Shape3& shape, const std::string& role) {
    return json{{"shape", {shape[0], shape[1], shape[2]}}, {"dtype", "f32le"}, {"role", role}};
}

Mask3 mask_from_floats(const std::vector<float>& data, const Shape3& shape,
                       const std::string& what) {
    Mask3 m(shape);
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (data[i] == 0.0f) m.data[i] = 0;
        else if (data[i] == 1.0f) m.data[i] = 1;
        else fail(what + " mask contains values other than 0/1");
    }
    return m;
}

std::vector<float> mask_to_floats(const Mask3& m) {
    std::vector<float> out(m.data.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = m.data[i] ? 1.0f : 0.0f;
    return out;
}

} // namespace

std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void save_sample(const LabeledSample& sample, const fs::path& dir) {
    sample.validate();
    fs::create_directories(dir);
    write_raw_f32(dir / "volume.raw", sample.volume.data.data(), sample.volume.data.size());
    const auto region_f = mask_to_floats(sample.region);
    write_raw_f32(dir / "region.raw", region_f.data(), region_f.size());

    json meta;
    meta["id"] = sample.id;
    meta["spacing"] = {sample.volume.spacing[0], sample.volume.spacing[1],
                       sample.volume.spacing[2]};
    meta["arrays"]["volume"] = array_entry(sample.volume.shape, "intensity");
    meta["arrays"]["region"] = array_entry(sample.region.shape, "region_mask");
    if (sample.true_lesion) {
        const auto lesion_f = mask_to_floats(*sample.true_lesion);
        write_raw_f32(dir / "lesion.raw", lesion_f.data(), lesion_f.size());
        meta["arrays"]["lesion"] = array_entry(sample.true_lesion->shape, "lesion_mask");
    }
    json labels;
    labels["grade_rater1"] = sample.grade_rater1;
    labels["grade_rater2"] = sample.grade_rater2;
    if (sample.true_proportion) labels["true_proportion"] = *sample.true_proportion;
    labels["pattern"] = pattern_name(sample.pattern);
    meta["labels"] = labels;

    std::ofstream out(dir / "meta.json");
    if (!out) fail("cannot open for writing: " + (dir / "meta.json").string());
    out << meta.dump(2) << "\n";
}

LabeledSample load_sample(const fs::path& dir) {
    const fs::path meta_path = dir / "meta.json";
    std::ifstream in(meta_path);
    if (!in) fail("missing file: " + meta_path.string());
    json meta;
    try {
        in >> meta;
    } catch (const json::exception& e) {
        fail("corrupt header: " + meta_path.string() + " (" + e.what() + ")");
    }

    LabeledSample s;
    try {
        s.id = meta.value("id", dir.filename().string());
        const Shape3 vshape = shape_from_json(meta.at("arrays").at("volume").at("shape"));
        s.volume.shape = vshape;
        const auto& sp = meta.at("spacing");
        for (int a = 0; a < 3; ++a) s.volume.spacing[a] = sp[a].get<double>();
        s.volume.data = read_raw_f32(dir / "volume.raw", numel(vshape));

        const Shape3 rshape = shape_from_json(meta.at("arrays").at("region").at("shape"));
        if (rshape != vshape) fail("region shape does not match volume");
        s.region = mask_from_floats(read_raw_f32(dir / "region.raw", numel(rshape)), rshape,
                                    "region");

        if (meta.at("arrays").contains("lesion")) {
            const Shape3 lshape = shape_from_json(meta["arrays"]["lesion"]["shape"]);
            if (lshape != vshape) fail("lesion shape does not match volume");
            s.true_lesion = mask_from_floats(read_raw_f32(dir / "lesion.raw", numel(lshape)),
                                             lshape, "lesion");
        }
        const auto& labels = meta.at("labels");
        s.grade_rater1 = labels.at("grade_rater1").get<int>();
        s.grade_rater2 = labels.at("grade_rater2").get<int>();
        if (labels.contains("true_proportion"))
            s.true_proportion = labels["true_proportion"].get<double>();
        s.pattern = pattern_from_name(labels.value("pattern", "none"));
    } catch (const json::exception& e) {
        fail("corrupt header: " + meta_path.string() + " (" + e.what() + ")");
    }
    s.validate();
    return s;
}

void write_labels_csv(const std::vector<LabelRow>& rows, const fs::path& file) {
    std::ofstream out(file);
    if (!out) fail("cannot open for writing: " + file.string());
    out << "id,grade_rater1,grade_rater2,true_proportion,pattern\n";
    for (const auto& r : rows)
        out << r.id << ',' << r.grade_rater1 << ',' << r.grade_rater2 << ','
            << format_double(r.true_proportion) << ',' << r.pattern << "\n";
    if (!out) fail("write failed: " + file.string());
}

std::vector<LabelRow> read_labels_csv(const fs::path& file) {
    std::ifstream in(file);
    if (!in) fail_user("missing file: " + file.string());
    std::string line;
    if (!std::getline(in, line)) fail("corrupt header: empty labels.csv");
    std::vector<LabelRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string field;
        LabelRow r;
        std::getline(ss, r.id, ',');
        std::getline(ss, field, ',');
        r.grade_rater1 = std::stoi(field);
        std::getline(ss, field, ',');
        r.grade_rater2 = std::stoi(field);
        std::getline(ss, field, ',');
        r.true_proportion = std::stod(field);
        std::getline(ss, r.pattern, ',');
        rows.push_back(std::move(r));
    }
    return rows;
}

std::vector<std::string> cohort_ids(const fs::path& root) {
    std::vector<std::string> ids;
    for (const auto& r : read_labels_csv(root / "labels.csv")) ids.push_back(r.id);
    return ids;
}

std::vector<LabeledSample> load_cohort(const fs::path& root) {
    std::vector<LabeledSample> samples;
    for (const auto& row : read_labels_csv(root / "labels.csv")) {
        LabeledSample s = load_sample(root / row.id);
        require(s.grade_rater1 == row.grade_rater1 && s.grade_rater2 == row.grade_rater2,
                "labels.csv disagrees with meta.json for sample " + row.id);
        samples.push_back(std::move(s));
    }
    return samples;
}

std::string file_checksum(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) fail("missing file: " + file.string());
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[65536];
    while (in) {
        in.read(buf, sizeof(buf));
        const std::streamsize got = in.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
    }
    char hex[17];
    std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
    return std::string(hex);
}

} // namespace llpq
