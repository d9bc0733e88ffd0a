#include <png.h>
#include <zlib.h>

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>

#include "telextiles/errors.hpp"
#include "telextiles/json_io.hpp"
#include "telextiles/tactile_data.hpp"

namespace fs = std::filesystem;

namespace telextiles {
namespace {

constexpr char kTensorMagic[4] = {'T', 'X', 'F', '1'};
constexpr int kManifestVersion = 1;
using Kind = DatasetError::Kind;

std::string frame_file(const SessionEntry& s, int index) {
  return "frames/" + s.sample_id + "/" + s.id + "/" + std::to_string(index) + ".png";
}

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

void write_png(const Image& image, const fs::path& path) {
  std::vector<png_byte> rgb(image.data.size());
  for (std::size_t i = 0; i < image.data.size(); ++i) {
    const float v = image.data[i];
    const long k = std::lround(v * 255.0f);
    if (k < 0 || k > 255 || static_cast<float>(k) / 255.0f != v)
      throw DatasetError(Kind::Format, "pixel values are not 8-bit exact; use the raw tensor storage");
    rgb[i] = static_cast<png_byte>(k);
  }
  FilePtr file(std::fopen(path.c_str(), "wb"));
  if (!file) throw DatasetError(Kind::Io, "cannot write " + path.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw DatasetError(Kind::Io, "libpng initialisation failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw DatasetError(Kind::Io, "libpng failed writing " + path.string());
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, image.width, image.height, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < image.height; ++y) png_write_row(png, rgb.data() + static_cast<std::size_t>(y) * image.width * 3);
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

Image read_png(const fs::path& path, const std::string& session_id) {
  FilePtr file(std::fopen(path.c_str(), "rb"));
  if (!file) throw DatasetError(Kind::MissingFile, "session " + session_id + ": missing frame file " + path.string());
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DatasetError(Kind::Io, "libpng initialisation failed");
  }
  Image image;
  std::vector<png_byte> row;  // declared before setjmp so a longjmp skips no destructor
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DatasetError(Kind::Format, "session " + session_id + ": unreadable PNG " + path.string());
  }
  png_init_io(png, file.get());
  png_read_info(png, info);
  if (png_get_color_type(png, info) != PNG_COLOR_TYPE_RGB || png_get_bit_depth(png, info) != 8) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DatasetError(Kind::Format, "session " + session_id + ": expected 8-bit RGB in " + path.string());
  }
  const int w = static_cast<int>(png_get_image_width(png, info));
  const int h = static_cast<int>(png_get_image_height(png, info));
  row.resize(static_cast<std::size_t>(w) * 3);
  image = Image(h, w);
  for (int y = 0; y < h; ++y) {
    png_read_row(png, row.data(), nullptr);
    for (std::size_t i = 0; i < row.size(); ++i)
      image.data[static_cast<std::size_t>(y) * row.size() + i] = static_cast<float>(row[i]) / 255.0f;
  }
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return image;
}

template <typename T>
void put_le(std::string& out, T v) {
  static_assert(std::endian::native == std::endian::little, "big-endian hosts are not supported");
  char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  out.append(b, sizeof(T));
}

std::string read_file(const fs::path& path, const std::string& what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetError(Kind::MissingFile, what + ": missing file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DatasetError(Kind::Io, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DatasetError(Kind::Io, "short write to " + path.string());
}

std::uint32_t crc_of(const char* data, std::size_t size) {
  uLong crc = crc32(0L, Z_NULL, 0);
  while (size > 0) {
    const uInt chunk = static_cast<uInt>(std::min<std::size_t>(size, 1u << 30));
    crc = crc32(crc, reinterpret_cast<const Bytef*>(data), chunk);
    data += chunk;
    size -= chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

}  // namespace

void save_dataset(const Dataset& dataset, const fs::path& root, FrameStorage storage) {
  const auto& m = dataset.manifest;
  m.validate();
  if (dataset.frames.size() != m.sessions.size()) throw ValidationError("frames do not match the session list");
  for (std::size_t s = 0; s < m.sessions.size(); ++s) {
    if (static_cast<int>(dataset.frames[s].size()) != m.sessions[s].frame_count)
      throw ValidationError("session " + m.sessions[s].id + " frame count differs from its manifest entry");
    for (const auto& f : dataset.frames[s])
      if (f.pixels.height != m.frame_height || f.pixels.width != m.frame_width)
        throw ValidationError("session " + m.sessions[s].id + " has frames of the wrong size");
  }
  fs::create_directories(root);

  nlohmann::json doc = m;
  doc["format"] = "telextiles-dataset";
  doc["version"] = kManifestVersion;
  if (storage == FrameStorage::Png) {
    doc["storage"] = "png";
    for (std::size_t s = 0; s < m.sessions.size(); ++s) {
      const auto& session = m.sessions[s];
      fs::create_directories(root / "frames" / session.sample_id / session.id);
      for (int i = 0; i < session.frame_count; ++i)
        write_png(dataset.frames[s][i].pixels, root / frame_file(session, i));
    }
  } else {
    std::uint32_t n_frames = 0;
    for (const auto& s : m.sessions) n_frames += static_cast<std::uint32_t>(s.frame_count);
    std::string payload;
    payload.reserve(static_cast<std::size_t>(n_frames) * m.frame_height * m.frame_width * 3 * sizeof(float));
    for (const auto& session : dataset.frames)
      for (const auto& f : session)
        for (float v : f.pixels.data) put_le<float>(payload, v);
    std::string bytes(kTensorMagic, 4);
    put_le<std::uint32_t>(bytes, n_frames);
    put_le<std::uint32_t>(bytes, static_cast<std::uint32_t>(m.frame_height));
    put_le<std::uint32_t>(bytes, static_cast<std::uint32_t>(m.frame_width));
    bytes += payload;
    write_file(root / "frames.bin", bytes);
    doc["storage"] = "bin";
    doc["frames_crc32"] = crc_of(payload.data(), payload.size());
  }
  write_file(root / "manifest.json", doc.dump(2) + "\n");
}

Dataset load_dataset(const fs::path& root) {
  Dataset dataset;
  nlohmann::json doc;
  std::string storage;
  try {
    doc = nlohmann::json::parse(read_file(root / "manifest.json", "dataset manifest"));
    if (doc.value("format", "") != "telextiles-dataset") throw DatasetError(Kind::Format, "not a dataset manifest");
    if (doc.value("version", 0) != kManifestVersion) throw DatasetError(Kind::Format, "unsupported manifest version");
    dataset.manifest = doc.get<DatasetManifest>();
    storage = doc.at("storage").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw DatasetError(Kind::Format, std::string("malformed manifest: ") + e.what());
  }
  const auto& m = dataset.manifest;
  try {
    m.validate();
  } catch (const ValidationError& e) {
    throw DatasetError(Kind::Format, std::string("invalid manifest: ") + e.what());
  }

  if (storage == "png") {
    for (const auto& session : m.sessions) {
      std::vector<TactileFrame> frames;
      for (int i = 0; i < session.frame_count; ++i) {
        Image img = read_png(root / frame_file(session, i), session.id);
        if (img.height != m.frame_height || img.width != m.frame_width)
          throw DatasetError(Kind::ShapeMismatch, "session " + session.id + ": frame " + std::to_string(i) +
                                                      " is " + std::to_string(img.height) + "x" +
                                                      std::to_string(img.width));
        frames.push_back({session.sample_id, i, std::move(img)});
      }
      dataset.frames.push_back(std::move(frames));
    }
  } else if (storage == "bin") {
    const std::string bytes = read_file(root / "frames.bin", "frame tensor");
    if (bytes.size() < 16 || std::memcmp(bytes.data(), kTensorMagic, 4) != 0)
      throw DatasetError(Kind::Format, "frames.bin: bad magic");
    std::uint32_t header[3];
    std::memcpy(header, bytes.data() + 4, sizeof header);
    const auto [n_frames, h, w] = header;
    std::uint64_t expected_frames = 0;
    for (const auto& s : m.sessions) expected_frames += static_cast<std::uint64_t>(s.frame_count);
    if (n_frames != expected_frames || static_cast<int>(h) != m.frame_height || static_cast<int>(w) != m.frame_width)
      throw DatasetError(Kind::ShapeMismatch, "frames.bin header disagrees with the manifest");
    const std::uint64_t frame_floats = static_cast<std::uint64_t>(h) * w * 3;
    const std::uint64_t payload_size = static_cast<std::uint64_t>(n_frames) * frame_floats * sizeof(float);
    if (bytes.size() - 16 != payload_size)
      throw DatasetError(Kind::ShapeMismatch, "frames.bin payload is " + std::to_string(bytes.size() - 16) +
                                                  " bytes, header implies " + std::to_string(payload_size));
    const std::uint32_t crc = crc_of(bytes.data() + 16, payload_size);
    if (!doc.contains("frames_crc32") || doc["frames_crc32"].get<std::uint32_t>() != crc)
      throw DatasetError(Kind::ChecksumMismatch, "frames.bin checksum mismatch");
    const char* cursor = bytes.data() + 16;
    for (const auto& session : m.sessions) {
      std::vector<TactileFrame> frames;
      for (int i = 0; i < session.frame_count; ++i) {
        Image img(static_cast<int>(h), static_cast<int>(w));
        std::memcpy(img.data.data(), cursor, frame_floats * sizeof(float));
        cursor += frame_floats * sizeof(float);
        frames.push_back({session.sample_id, i, std::move(img)});
      }
      dataset.frames.push_back(std::move(frames));
    }
  } else {
    throw DatasetError(Kind::Format, "unknown frame storage \"" + storage + "\"");
  }
  return dataset;
}

}  // namespace telextiles
