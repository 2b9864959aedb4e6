#include "geossl/data.hpp"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <zlib.h>

#include <algorithm>
#include <cstring>
#include <fstream>
#include <map>
#include <thread>

#include <json.hpp>

namespace geossl::data {

namespace fs = std::filesystem;
using nlohmann::json;

std::filesystem::path default_data_root() {
    if (const char* env = std::getenv("GEOSSL_DATA_ROOT"); env && *env) return env;
    return "data";
}

// ---------------------------------------------------------------------------
// Synthetic generators
// ---------------------------------------------------------------------------

namespace {

void noisy_background(Image& img, Rng& rng) {
    const float base[3] = {static_cast<float>(rng.uniform(0.1, 0.5)),
                           static_cast<float>(rng.uniform(0.1, 0.5)),
                           static_cast<float>(rng.uniform(0.1, 0.5))};
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < 3; ++c)
                img.at(y, x, c) = std::clamp(
                    base[c] + static_cast<float>(rng.uniform(-0.08, 0.08)), 0.f, 1.f);
}

void fill_color(Rng& rng, float color[3]) {
    // Bright, saturated foreground so shapes stand off the background.
    for (int c = 0; c < 3; ++c) color[c] = static_cast<float>(rng.uniform(0.55, 1.0));
    color[static_cast<size_t>(rng.below(3))] = static_cast<float>(rng.uniform(0.0, 0.25));
}

Image shape_image(int cls, Rng& rng) {
    Image img(32, 32, 3);
    noisy_background(img, rng);
    float color[3];
    fill_color(rng, color);
    const double cx = rng.uniform(11, 21);
    const double cy = rng.uniform(11, 21);
    const double r = rng.uniform(5.0, 9.0);
    auto paint = [&](int y, int x) {
        for (int c = 0; c < 3; ++c) img.at(y, x, c) = color[c];
    };
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x) {
            const double dx = x - cx, dy = y - cy;
            bool inside = false;
            if (cls == 0) {  // disc
                inside = dx * dx + dy * dy <= r * r;
            } else if (cls == 1) {  // square
                inside = std::abs(dx) <= r * 0.85 && std::abs(dy) <= r * 0.85;
            } else {  // upward triangle
                inside = dy >= -r && dy <= r * 0.8 &&
                         std::abs(dx) <= (dy + r) * 0.55;
            }
            if (inside) paint(y, x);
        }
    return img;
}

Image arrow_canvas(Rng& rng) {
    Image img(32, 32, 3);
    noisy_background(img, rng);
    float color[3];
    fill_color(rng, color);
    const double cx = rng.uniform(13, 19);
    const double top = rng.uniform(4.0, 8.0);
    const double len = rng.uniform(16.0, 22.0);
    const double half_w = rng.uniform(1.2, 2.2);
    const double head = rng.uniform(5.0, 7.0);
    // Upward arrow: triangular head at the top, shaft below.
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x) {
            const double dy = y - top;
            bool inside = false;
            if (dy >= 0 && dy <= head) {
                inside = std::abs(x - cx) <= dy * 0.9;
            } else if (dy > head && dy <= len) {
                inside = std::abs(x - cx) <= half_w;
            }
            if (inside)
                for (int c = 0; c < 3; ++c) img.at(y, x, c) = color[c];
        }
    return img;
}

DatasetHandle make_synthetic(const std::string& name, int n_train, int n_test,
                             std::uint64_t seed, int num_classes,
                             Image (*gen)(int, Rng&)) {
    if (n_train + n_test < 10) throw ValidationError("synthetic datasets need n >= 10");
    DatasetHandle h;
    h.name = name;
    h.num_classes = num_classes;
    h.resolution = 32;
    Rng rng(derive_seed(seed, name));
    const int total = n_train + n_test;
    for (int i = 0; i < total; ++i) {
        const int cls = i % num_classes;
        Image img = gen(cls, rng);
        if (i < n_train) {
            h.train_images.push_back(std::move(img));
            h.train_labels.push_back(cls);
        } else {
            h.test_images.push_back(std::move(img));
            h.test_labels.push_back(cls);
        }
    }
    return h;
}

Image shapes_gen(int cls, Rng& rng) {
    return shape_image(cls, rng);
}

Image arrows_gen(int cls, Rng& rng) {
    // Class 1 is exactly the 180-degree rotation of a fresh canvas.
    Image canvas = arrow_canvas(rng);
    return cls == 0 ? canvas : rotate180(canvas);
}

}  // namespace

DatasetHandle synthetic_shapes(int n_train, int n_test, std::uint64_t seed) {
    return make_synthetic("synthetic-shapes", n_train, n_test, seed, 3, shapes_gen);
}

DatasetHandle synthetic_arrows(int n_train, int n_test, std::uint64_t seed) {
    return make_synthetic("synthetic-arrows", n_train, n_test, seed, 2, arrows_gen);
}

// ---------------------------------------------------------------------------
// Decoded-tensor cache with content hashes
// ---------------------------------------------------------------------------

namespace {

constexpr std::uint32_t kBlobMagic = 0x47534443;  // "GSDC"

std::string encode_split(const std::vector<Image>& images, const std::vector<int>& labels) {
    std::string out;
    const int h = images.empty() ? 0 : images[0].height;
    const int w = images.empty() ? 0 : images[0].width;
    const int c = images.empty() ? 0 : images[0].channels;
    const std::uint32_t header[5] = {kBlobMagic, static_cast<std::uint32_t>(images.size()),
                                     static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(w),
                                     static_cast<std::uint32_t>(c)};
    out.append(reinterpret_cast<const char*>(header), sizeof(header));
    for (size_t i = 0; i < images.size(); ++i) {
        const std::int32_t label = labels[i];
        out.append(reinterpret_cast<const char*>(&label), sizeof(label));
        for (float v : images[i].data) {
            const auto byte = static_cast<unsigned char>(std::lround(std::clamp(v, 0.f, 1.f) * 255.f));
            out.push_back(static_cast<char>(byte));
        }
    }
    return out;
}

void decode_split(const std::string& blob, std::vector<Image>& images,
                  std::vector<int>& labels) {
    if (blob.size() < 20) throw IntegrityError("cache blob truncated");
    std::uint32_t header[5];
    std::memcpy(header, blob.data(), sizeof(header));
    if (header[0] != kBlobMagic) throw IntegrityError("cache blob has wrong magic");
    const size_t n = header[1], h = header[2], w = header[3], c = header[4];
    const size_t rec = 4 + h * w * c;
    if (blob.size() != sizeof(header) + n * rec) throw IntegrityError("cache blob size mismatch");
    const char* p = blob.data() + sizeof(header);
    images.clear();
    labels.clear();
    for (size_t i = 0; i < n; ++i) {
        std::int32_t label;
        std::memcpy(&label, p, 4);
        p += 4;
        Image img(static_cast<int>(h), static_cast<int>(w), static_cast<int>(c));
        for (size_t j = 0; j < h * w * c; ++j)
            img.data[j] = static_cast<float>(static_cast<unsigned char>(p[j])) / 255.f;
        p += h * w * c;
        images.push_back(std::move(img));
        labels.push_back(label);
    }
}

/// Simple lock-file guard around cache construction.
class CacheLock {
  public:
    explicit CacheLock(const fs::path& dir) : lock_(dir / ".lock") {
        fs::create_directories(dir);
        for (int attempt = 0; attempt < 600; ++attempt) {
            std::ofstream probe(lock_, std::ios::out | std::ios::app);
            // A stale or contended lock: wait briefly, then take over.
            if (!fs::exists(lock_) || attempt == 599 || try_acquire()) return;
            std::this_thread::sleep_for(std::chrono::milliseconds(50));
        }
    }
    ~CacheLock() {
        std::error_code ec;
        fs::remove(lock_, ec);
    }

  private:
    bool try_acquire() {
        // Creation with no prior file counts as acquisition.
        std::error_code ec;
        return fs::exists(lock_, ec);
    }
    fs::path lock_;
};

void write_cache(const DatasetHandle& h, const fs::path& dir) {
    CacheLock lock(dir);
    const std::string train_blob = encode_split(h.train_images, h.train_labels);
    const std::string test_blob = encode_split(h.test_images, h.test_labels);
    atomic_write_file(dir / "train.bin", train_blob);
    atomic_write_file(dir / "test.bin", test_blob);
    json manifest{{"version", 1},
                  {"name", h.name},
                  {"num_classes", h.num_classes},
                  {"resolution", h.resolution},
                  {"train", {{"count", h.train_images.size()}, {"sha256", sha256_hex(train_blob)}}},
                  {"test", {{"count", h.test_images.size()}, {"sha256", sha256_hex(test_blob)}}}};
    atomic_write_file(dir / "manifest.json", manifest.dump(2));
}

bool cache_exists(const fs::path& dir) {
    return fs::exists(dir / "manifest.json") && fs::exists(dir / "train.bin") &&
           fs::exists(dir / "test.bin");
}

DatasetHandle load_cache(const std::string& name, const fs::path& dir,
                         const ChannelStats& stats) {
    json manifest = json::parse(read_file(dir / "manifest.json"));
    DatasetHandle h;
    h.name = name;
    h.num_classes = manifest.at("num_classes").get<int>();
    h.resolution = manifest.at("resolution").get<int>();
    h.stats = stats;
    h.cache_dir = dir;
    for (const char* split : {"train", "test"}) {
        const std::string blob = read_file(dir / (std::string(split) + ".bin"));
        const std::string want = manifest.at(split).at("sha256").get<std::string>();
        if (sha256_hex(blob) != want)
            throw IntegrityError("cache checksum mismatch for " + name + "/" + split);
        if (std::string(split) == "train")
            decode_split(blob, h.train_images, h.train_labels);
        else
            decode_split(blob, h.test_images, h.test_labels);
    }
    return h;
}

// ---------------------------------------------------------------------------
// CIFAR binary layouts
// ---------------------------------------------------------------------------

Image cifar_record_to_image(const unsigned char* pixels) {
    Image img(32, 32, 3);
    for (int c = 0; c < 3; ++c)
        for (int y = 0; y < 32; ++y)
            for (int x = 0; x < 32; ++x)
                img.at(y, x, c) =
                    static_cast<float>(pixels[(c * 32 + y) * 32 + x]) / 255.f;
    return img;
}

void parse_cifar_file(const fs::path& file, int label_bytes, std::vector<Image>& images,
                      std::vector<int>& labels) {
    const std::string bytes = read_file(file);
    const size_t rec = static_cast<size_t>(label_bytes) + 3072;
    if (bytes.empty() || bytes.size() % rec != 0)
        throw IntegrityError("unexpected record layout in " + file.string());
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    for (size_t off = 0; off < bytes.size(); off += rec) {
        // Multi-byte labels: the fine label comes last.
        labels.push_back(p[off + static_cast<size_t>(label_bytes) - 1]);
        images.push_back(cifar_record_to_image(p + off + static_cast<size_t>(label_bytes)));
    }
}

DatasetHandle decode_cifar10(const fs::path& root) {
    const fs::path dir = root / "cifar-10-batches-bin";
    DatasetHandle h;
    h.name = "cifar10";
    h.num_classes = 10;
    for (int i = 1; i <= 5; ++i) {
        const fs::path f = dir / ("data_batch_" + std::to_string(i) + ".bin");
        if (!fs::exists(f))
            throw FetchError("missing archive file " + f.string() +
                             " (run `datasets fetch` or place the extracted archive)");
        parse_cifar_file(f, 1, h.train_images, h.train_labels);
    }
    const fs::path t = dir / "test_batch.bin";
    if (!fs::exists(t)) throw FetchError("missing archive file " + t.string());
    parse_cifar_file(t, 1, h.test_images, h.test_labels);
    return h;
}

DatasetHandle decode_cifar100(const fs::path& root) {
    const fs::path dir = root / "cifar-100-binary";
    DatasetHandle h;
    h.name = "cifar100";
    h.num_classes = 100;
    for (const auto& [file, is_train] :
         std::vector<std::pair<std::string, bool>>{{"train.bin", true}, {"test.bin", false}}) {
        const fs::path f = dir / file;
        if (!fs::exists(f))
            throw FetchError("missing archive file " + f.string() +
                             " (run `datasets fetch` or place the extracted archive)");
        if (is_train)
            parse_cifar_file(f, 2, h.train_images, h.train_labels);
        else
            parse_cifar_file(f, 2, h.test_images, h.test_labels);
    }
    return h;
}

// ---------------------------------------------------------------------------
// SVHN (cropped digits): MATLAB level-5 container with X [32x32x3xN] uint8
// and y [Nx1] labels where 10 denotes digit zero.
// ---------------------------------------------------------------------------

std::string zlib_inflate(const unsigned char* src, size_t len) {
    z_stream zs{};
    if (inflateInit2(&zs, 32 + 15) != Z_OK) throw IoError("zlib init failed");
    std::string out;
    out.resize(std::max<size_t>(len * 4, 1 << 20));
    zs.next_in = const_cast<unsigned char*>(src);
    zs.avail_in = static_cast<uInt>(len);
    size_t written = 0;
    int ret = Z_OK;
    while (ret != Z_STREAM_END) {
        if (written == out.size()) out.resize(out.size() * 2);
        zs.next_out = reinterpret_cast<unsigned char*>(out.data()) + written;
        zs.avail_out = static_cast<uInt>(out.size() - written);
        ret = inflate(&zs, Z_NO_FLUSH);
        if (ret != Z_OK && ret != Z_STREAM_END) {
            inflateEnd(&zs);
            throw IntegrityError("zlib stream corrupt");
        }
        written = out.size() - zs.avail_out;
    }
    inflateEnd(&zs);
    out.resize(written);
    return out;
}

struct MatArray {
    std::string name;
    std::vector<int> dims;
    int matlab_class = 0;
    std::vector<double> values;  // widened for convenience
};

// Parses the sub-elements of one miMATRIX payload.
MatArray parse_mat_matrix(const unsigned char* p, size_t len) {
    MatArray arr;
    size_t off = 0;
    int element_index = 0;
    while (off + 8 <= len) {
        std::uint32_t type, size;
        std::memcpy(&type, p + off, 4);
        std::memcpy(&size, p + off + 4, 4);
        const unsigned char* payload;
        size_t payload_len, advance;
        if (type & 0xffff0000u) {  // small element: size in the upper half
            payload_len = type >> 16;
            type &= 0xffffu;
            payload = p + off + 4;
            advance = 8;
        } else {
            payload = p + off + 8;
            payload_len = size;
            advance = 8 + ((payload_len + 7) & ~size_t(7));
        }
        switch (element_index) {
            case 0: {  // array flags
                std::uint32_t flags;
                std::memcpy(&flags, payload, 4);
                arr.matlab_class = static_cast<int>(flags & 0xff);
                break;
            }
            case 1: {  // dimensions, int32
                for (size_t i = 0; i + 4 <= payload_len; i += 4) {
                    std::int32_t d;
                    std::memcpy(&d, payload + i, 4);
                    arr.dims.push_back(d);
                }
                break;
            }
            case 2:  // array name
                arr.name.assign(reinterpret_cast<const char*>(payload), payload_len);
                break;
            case 3: {  // real part
                const size_t mi_type = type;
                if (mi_type == 2) {  // miUINT8
                    arr.values.resize(payload_len);
                    for (size_t i = 0; i < payload_len; ++i)
                        arr.values[i] = static_cast<double>(payload[i]);
                } else if (mi_type == 9) {  // miDOUBLE
                    arr.values.resize(payload_len / 8);
                    for (size_t i = 0; i < arr.values.size(); ++i)
                        std::memcpy(&arr.values[i], payload + i * 8, 8);
                } else if (mi_type == 5) {  // miINT32
                    arr.values.resize(payload_len / 4);
                    for (size_t i = 0; i < arr.values.size(); ++i) {
                        std::int32_t v;
                        std::memcpy(&v, payload + i * 4, 4);
                        arr.values[i] = v;
                    }
                } else {
                    throw IntegrityError("unsupported MAT data type " + std::to_string(mi_type));
                }
                break;
            }
            default:
                break;
        }
        ++element_index;
        off += advance;
    }
    return arr;
}

std::map<std::string, MatArray> parse_mat5(const fs::path& file) {
    const std::string bytes = read_file(file);
    if (bytes.size() < 128) throw IntegrityError("not a MAT-file: " + file.string());
    std::uint16_t endian;
    std::memcpy(&endian, bytes.data() + 126, 2);
    if (endian != 0x4d49)  // "MI" read little-endian
        throw IntegrityError("unsupported MAT-file byte order");

    std::map<std::string, MatArray> out;
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    size_t off = 128;
    while (off + 8 <= bytes.size()) {
        std::uint32_t type, size;
        std::memcpy(&type, p + off, 4);
        std::memcpy(&size, p + off + 4, 4);
        const unsigned char* payload = p + off + 8;
        if (off + 8 + size > bytes.size()) throw IntegrityError("truncated MAT element");
        if (type == 15) {  // miCOMPRESSED
            const std::string raw = zlib_inflate(payload, size);
            std::uint32_t itype, isize;
            std::memcpy(&itype, raw.data(), 4);
            std::memcpy(&isize, raw.data() + 4, 4);
            if (itype == 14) {
                MatArray arr = parse_mat_matrix(
                    reinterpret_cast<const unsigned char*>(raw.data()) + 8, isize);
                out[arr.name] = std::move(arr);
            }
        } else if (type == 14) {  // miMATRIX
            MatArray arr = parse_mat_matrix(payload, size);
            out[arr.name] = std::move(arr);
        }
        off += 8 + ((static_cast<size_t>(size) + 7) & ~size_t(7));
    }
    return out;
}

void decode_svhn_split(const fs::path& file, std::vector<Image>& images,
                       std::vector<int>& labels) {
    if (!fs::exists(file))
        throw FetchError("missing archive file " + file.string() +
                         " (run `datasets fetch` or place the .mat files)");
    auto arrays = parse_mat5(file);
    if (!arrays.count("X") || !arrays.count("y"))
        throw IntegrityError("MAT-file lacks X/y arrays: " + file.string());
    const MatArray& x = arrays["X"];
    const MatArray& y = arrays["y"];
    if (x.dims.size() != 4 || x.dims[0] != 32 || x.dims[1] != 32 || x.dims[2] != 3)
        throw IntegrityError("unexpected X dimensions in " + file.string());
    const size_t n = static_cast<size_t>(x.dims[3]);
    if (y.values.size() != n) throw IntegrityError("X/y count mismatch in " + file.string());
    // Column-major [h, w, c, n].
    for (size_t img_idx = 0; img_idx < n; ++img_idx) {
        Image img(32, 32, 3);
        for (int c = 0; c < 3; ++c)
            for (int xcol = 0; xcol < 32; ++xcol)
                for (int yrow = 0; yrow < 32; ++yrow) {
                    const size_t idx = static_cast<size_t>(yrow) + 32 * (static_cast<size_t>(xcol) +
                                       32 * (static_cast<size_t>(c) + 3 * img_idx));
                    img.at(yrow, xcol, c) = static_cast<float>(x.values[idx]) / 255.f;
                }
        images.push_back(std::move(img));
        const int digit = static_cast<int>(y.values[img_idx]);
        labels.push_back(digit % 10);  // label 10 encodes digit zero
    }
}

DatasetHandle decode_svhn(const fs::path& root) {
    DatasetHandle h;
    h.name = "svhn";
    h.num_classes = 10;
    decode_svhn_split(root / "svhn" / "train_32x32.mat", h.train_images, h.train_labels);
    decode_svhn_split(root / "svhn" / "test_32x32.mat", h.test_images, h.test_labels);
    return h;
}

ChannelStats stats_for(const std::string& name) {
    // Published per-channel statistics for the benchmarks; generic values
    // for the synthetic sets.
    if (name == "cifar10")
        return {{0.4914f, 0.4822f, 0.4465f}, {0.2470f, 0.2435f, 0.2616f}};
    if (name == "cifar100")
        return {{0.5071f, 0.4865f, 0.4409f}, {0.2673f, 0.2564f, 0.2762f}};
    if (name == "svhn" || name == "svhn-6v9")
        return {{0.4377f, 0.4438f, 0.4728f}, {0.1980f, 0.2010f, 0.1970f}};
    return {};
}

DatasetHandle load_benchmark(const std::string& name, const DataOptions& opts) {
    const fs::path root = opts.root.empty() ? default_data_root() : opts.root;
    const fs::path cache_dir = root / "cache" / name;
    if (cache_exists(cache_dir)) {
        try {
            return load_cache(name, cache_dir, stats_for(name));
        } catch (const IntegrityError&) {
            // Surface the corruption; the removed cache rebuilds on retry.
            fs::remove_all(cache_dir);
            throw;
        }
    }
    DatasetHandle h;
    if (name == "cifar10")
        h = decode_cifar10(root);
    else if (name == "cifar100")
        h = decode_cifar100(root);
    else
        h = decode_svhn(root);
    h.stats = stats_for(name);
    h.cache_dir = cache_dir;
    write_cache(h, cache_dir);
    return h;
}

}  // namespace

DatasetHandle subset_classes(const DatasetHandle& handle, const std::vector<int>& classes) {
    if (classes.size() < 2) throw ValidationError("subset needs at least two classes");
    std::vector<int> sorted = classes;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw ValidationError("subset classes must be distinct");
    for (int c : classes)
        if (c < 0 || c >= handle.num_classes)
            throw ValidationError("subset class " + std::to_string(c) + " out of range");

    std::map<int, int> remap;
    for (size_t i = 0; i < classes.size(); ++i) remap[classes[i]] = static_cast<int>(i);

    DatasetHandle out;
    out.name = handle.name + "-subset";
    out.num_classes = static_cast<int>(classes.size());
    out.resolution = handle.resolution;
    out.stats = handle.stats;
    auto filter = [&](const std::vector<Image>& imgs, const std::vector<int>& labels,
                      std::vector<Image>& oi, std::vector<int>& ol) {
        for (size_t i = 0; i < imgs.size(); ++i) {
            auto it = remap.find(labels[i]);
            if (it != remap.end()) {
                oi.push_back(imgs[i]);
                ol.push_back(it->second);
            }
        }
    };
    filter(handle.train_images, handle.train_labels, out.train_images, out.train_labels);
    filter(handle.test_images, handle.test_labels, out.test_images, out.test_labels);
    if (out.train_images.empty() || out.test_images.empty())
        throw ValidationError("subset produced an empty split");
    return out;
}

DatasetHandle load_dataset(const std::string& name, const DataOptions& opts) {
    if (name == "synthetic-shapes")
        return synthetic_shapes(opts.synthetic_train, opts.synthetic_test, opts.synthetic_seed);
    if (name == "synthetic-arrows")
        return synthetic_arrows(opts.synthetic_train, opts.synthetic_test, opts.synthetic_seed);
    if (name == "cifar10" || name == "cifar100" || name == "svhn")
        return load_benchmark(name, opts);
    if (name == "svhn-6v9") {
        DatasetHandle svhn = load_benchmark("svhn", opts);
        DatasetHandle sub = subset_classes(svhn, {6, 9});
        sub.name = "svhn-6v9";
        return sub;
    }
    throw ValidationError("unknown dataset: '" + name + "'");
}

// ---------------------------------------------------------------------------
// Archive fetching
// ---------------------------------------------------------------------------

namespace {

struct ArchiveSpec {
    std::string url;
    std::string member_dir;  // expected directory after extraction ("" = plain file)
    fs::path target;         // where the payload lands relative to root
    bool is_tar_gz = true;
};

std::vector<ArchiveSpec> archives_for(const std::string& name) {
    if (name == "cifar10")
        return {{"https://www.cs.toronto.edu/~kriz/cifar-10-binary.tar.gz",
                 "cifar-10-batches-bin", "", true}};
    if (name == "cifar100")
        return {{"https://www.cs.toronto.edu/~kriz/cifar-100-binary.tar.gz",
                 "cifar-100-binary", "", true}};
    if (name == "svhn")
        return {{"http://ufldl.stanford.edu/housenumbers/train_32x32.mat", "",
                 fs::path("svhn") / "train_32x32.mat", false},
                {"http://ufldl.stanford.edu/housenumbers/test_32x32.mat", "",
                 fs::path("svhn") / "test_32x32.mat", false}};
    throw ValidationError("no archives registered for dataset '" + name + "'");
}

std::string http_get(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw ValidationError("malformed URL: " + url);
    const auto path_start = url.find('/', scheme_end + 3);
    const std::string origin = path_start == std::string::npos ? url : url.substr(0, path_start);
    const std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);
    httplib::Client client(origin);
    client.set_follow_location(true);
    client.set_read_timeout(600, 0);
    auto res = client.Get(path);
    if (!res || res->status != 200)
        throw FetchError("download failed for " + url +
                         (res ? " (status " + std::to_string(res->status) + ")"
                              : " (no response)"));
    return std::move(res->body);
}

// Minimal ustar extraction: regular files only, paths sanitized.
void untar_gz(const std::string& targz, const fs::path& dest) {
    const std::string tar = zlib_inflate(
        reinterpret_cast<const unsigned char*>(targz.data()), targz.size());
    size_t off = 0;
    while (off + 512 <= tar.size()) {
        const char* hdr = tar.data() + off;
        if (hdr[0] == '\0') break;  // end-of-archive blocks
        std::string path(hdr, strnlen(hdr, 100));
        char size_field[13] = {};
        std::memcpy(size_field, hdr + 124, 12);
        const size_t size = std::strtoull(size_field, nullptr, 8);
        const char type = hdr[156];
        off += 512;
        if (type == '0' || type == '\0') {
            if (path.find("..") != std::string::npos)
                throw IntegrityError("archive member escapes destination: " + path);
            const fs::path out = dest / path;
            atomic_write_file(out, std::string_view(tar.data() + off, size));
        }
        off += (size + 511) & ~size_t(511);
    }
}

}  // namespace

void fetch_dataset(const std::string& name, const DataOptions& opts) {
    if (name == "synthetic-shapes" || name == "synthetic-arrows") return;
    const std::string base = name == "svhn-6v9" ? "svhn" : name;
    const fs::path root = opts.root.empty() ? default_data_root() : opts.root;
    fs::create_directories(root);

    auto specs = archives_for(base);
    if (!opts.url.empty() && specs.size() == 1) specs[0].url = opts.url;
    for (const auto& spec : specs) {
        const bool present = spec.is_tar_gz
                                 ? fs::exists(root / spec.member_dir)
                                 : fs::exists(root / spec.target);
        if (present) continue;
        if (!opts.download)
            throw FetchError("archive for '" + base + "' is missing under " + root.string() +
                             " and downloading is disabled (pass --download)");
        const std::string body = http_get(spec.url);
        if (!opts.expected_sha256.empty() && sha256_hex(body) != opts.expected_sha256)
            throw IntegrityError("downloaded archive checksum mismatch for " + spec.url);
        if (spec.is_tar_gz)
            untar_gz(body, root);
        else
            atomic_write_file(root / spec.target, body);
    }
    // Build (or rebuild) the decoded cache now so training never pays for it.
    load_benchmark(base, opts);
}

nn::Tensor pack_images(std::span<const Image> images, const ChannelStats& stats) {
    if (images.empty()) throw ShapeError("pack_images: empty batch");
    const int h = images[0].height, w = images[0].width, c = images[0].channels;
    if (c != 3) throw ShapeError("pack_images: expected 3 channels");
    nn::Tensor out({static_cast<int>(images.size()), 3, h, w});
    float* dst = out.data.data();
    for (const Image& img : images) {
        if (img.height != h || img.width != w || img.channels != c)
            throw ShapeError("pack_images: mixed image dimensions");
        for (int ch = 0; ch < 3; ++ch)
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x)
                    *dst++ = (img.at(y, x, ch) - stats.mean[static_cast<size_t>(ch)]) /
                             stats.stddev[static_cast<size_t>(ch)];
    }
    return out;
}

}  // namespace geossl::data
