#include "evsup/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace evsup {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open for writing: " + path);
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open for reading: " + path);
  return in;
}

template <typename T>
void put_le(std::ofstream& out, T value) {
  std::array<char, sizeof(T)> bytes;
  auto u = std::bit_cast<std::array<unsigned char, sizeof(T)>>(value);
  for (std::size_t i = 0; i < sizeof(T); ++i)
    bytes[i] = static_cast<char>(std::endian::native == std::endian::little
                                     ? u[i]
                                     : u[sizeof(T) - 1 - i]);
  out.write(bytes.data(), sizeof(T));
}

template <typename T>
T get_le(std::ifstream& in, const std::string& path) {
  std::array<unsigned char, sizeof(T)> bytes;
  if (!in.read(reinterpret_cast<char*>(bytes.data()), sizeof(T)))
    throw FormatError("truncated file: " + path);
  if constexpr (sizeof(T) > 1) {
    if (std::endian::native != std::endian::little) std::reverse(bytes.begin(), bytes.end());
  }
  return std::bit_cast<T>(bytes);
}

void put_magic(std::ofstream& out, const char (&magic)[5]) { out.write(magic, 4); }

void expect_magic(std::ifstream& in, const char (&magic)[5], const std::string& path) {
  char got[4];
  if (!in.read(got, 4) || std::memcmp(got, magic, 4) != 0)
    throw FormatError(std::string("bad magic, expected ") + magic + ": " + path);
}

void put_image_f32(std::ofstream& out, const ImageR& img) {
  for (Eigen::Index y = 0; y < img.rows(); ++y)
    for (Eigen::Index x = 0; x < img.cols(); ++x) put_le(out, static_cast<float>(img(y, x)));
}

ImageR get_image_f32(std::ifstream& in, int h, int w, const std::string& path) {
  ImageR img(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) img(y, x) = static_cast<Real>(get_le<float>(in, path));
  return img;
}

void require_dims(std::uint32_t w, std::uint32_t h, const std::string& path) {
  if (w == 0 || h == 0 || w > 1u << 16 || h > 1u << 16)
    throw FormatError("implausible geometry: " + path);
}

}  // namespace

void write_events_evs1(const std::string& path, const EventStream& stream) {
  auto out = open_out(path);
  put_magic(out, "EVS1");
  put_le(out, static_cast<std::uint32_t>(stream.width));
  put_le(out, static_cast<std::uint32_t>(stream.height));
  put_le(out, static_cast<std::uint64_t>(stream.events.size()));
  for (const Event& e : stream.events) {
    put_le(out, e.x);
    put_le(out, e.y);
    put_le(out, e.t);
    put_le(out, e.p);
  }
  if (!out) throw FormatError("write failed: " + path);
}

EventStream read_events_evs1(const std::string& path) {
  auto in = open_in(path);
  expect_magic(in, "EVS1", path);
  EventStream stream;
  const auto w = get_le<std::uint32_t>(in, path);
  const auto h = get_le<std::uint32_t>(in, path);
  require_dims(w, h, path);
  stream.width = static_cast<int>(w);
  stream.height = static_cast<int>(h);
  const auto count = get_le<std::uint64_t>(in, path);
  stream.events.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    Event e;
    e.x = get_le<std::uint16_t>(in, path);
    e.y = get_le<std::uint16_t>(in, path);
    e.t = get_le<std::int64_t>(in, path);
    e.p = get_le<std::int8_t>(in, path);
    stream.events.push_back(e);
  }
  try {
    validate(stream);
  } catch (const std::invalid_argument& err) {
    throw FormatError(std::string("invalid event file ") + path + ": " + err.what());
  }
  return stream;
}

void write_events_csv(const std::string& path, const EventStream& stream) {
  auto out = open_out(path);
  out << "x,y,t_us,p\n";
  for (const Event& e : stream.events)
    out << e.x << ',' << e.y << ',' << e.t << ',' << static_cast<int>(e.p) << '\n';
  if (!out) throw FormatError("write failed: " + path);
}

EventStream read_events_csv(const std::string& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("x,y,t_us,p", 0) != 0)
    throw FormatError("missing csv header: " + path);
  EventStream stream;
  int max_x = 0;
  int max_y = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    long long x, y, t, p;
    char c1, c2, c3;
    if (!(row >> x >> c1 >> y >> c2 >> t >> c3 >> p) || c1 != ',' || c2 != ',' || c3 != ',')
      throw FormatError("malformed csv row: " + path);
    Event e;
    e.x = static_cast<std::uint16_t>(x);
    e.y = static_cast<std::uint16_t>(y);
    e.t = t;
    e.p = static_cast<std::int8_t>(p);
    stream.events.push_back(e);
    max_x = std::max(max_x, static_cast<int>(x));
    max_y = std::max(max_y, static_cast<int>(y));
  }
  // CSV carries no geometry; tightest bounding box.
  stream.width = max_x + 1;
  stream.height = max_y + 1;
  try {
    validate(stream);
  } catch (const std::invalid_argument& err) {
    throw FormatError(std::string("invalid event csv ") + path + ": " + err.what());
  }
  return stream;
}

void write_mask_pgm(const std::string& path, const IMOMask& mask) {
  auto out = open_out(path);
  out << "P5\n" << mask.width() << ' ' << mask.height() << "\n255\n";
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x)
      out.put(mask.values(y, x) ? static_cast<char>(255) : 0);
  if (!out) throw FormatError("write failed: " + path);
}

IMOMask read_mask_pgm(const std::string& path) {
  auto in = open_in(path);
  std::string magic;
  in >> magic;
  if (magic != "P5") throw FormatError("not a binary pgm: " + path);
  auto next_token = [&in, &path] {
    std::string tok;
    while (in >> tok) {
      if (tok[0] == '#') {
        std::string rest;
        std::getline(in, rest);
        continue;
      }
      return tok;
    }
    throw FormatError("truncated pgm header: " + path);
  };
  const int w = std::stoi(next_token());
  const int h = std::stoi(next_token());
  const int maxval = std::stoi(next_token());
  if (w <= 0 || h <= 0 || maxval != 255) throw FormatError("unsupported pgm: " + path);
  in.get();  // single whitespace after maxval
  IMOMask mask = IMOMask::zeros(h, w);
  std::vector<char> row(static_cast<std::size_t>(w));
  for (int y = 0; y < h; ++y) {
    if (!in.read(row.data(), w)) throw FormatError("truncated pgm data: " + path);
    for (int x = 0; x < w; ++x)
      mask.values(y, x) = static_cast<unsigned char>(row[static_cast<std::size_t>(x)]) >= 128;
  }
  return mask;
}

void write_logits_mlg1(const std::string& path, const MaskLogits& logits) {
  auto out = open_out(path);
  put_magic(out, "MLG1");
  put_le(out, static_cast<std::uint32_t>(logits.width()));
  put_le(out, static_cast<std::uint32_t>(logits.height()));
  put_image_f32(out, logits.values);
  if (!out) throw FormatError("write failed: " + path);
}

MaskLogits read_logits_mlg1(const std::string& path) {
  auto in = open_in(path);
  expect_magic(in, "MLG1", path);
  const auto w = get_le<std::uint32_t>(in, path);
  const auto h = get_le<std::uint32_t>(in, path);
  require_dims(w, h, path);
  MaskLogits logits;
  logits.values = get_image_f32(in, static_cast<int>(h), static_cast<int>(w), path);
  return logits;
}

void write_flow_flo1(const std::string& path, const FlowField& flow) {
  auto out = open_out(path);
  put_magic(out, "FLO1");
  put_le(out, static_cast<std::uint32_t>(flow.width()));
  put_le(out, static_cast<std::uint32_t>(flow.height()));
  put_le(out, static_cast<std::uint64_t>(flow.dur_ref_us));
  for (int y = 0; y < flow.height(); ++y)
    for (int x = 0; x < flow.width(); ++x) {
      put_le(out, static_cast<float>(flow.u(y, x)));
      put_le(out, static_cast<float>(flow.v(y, x)));
    }
  if (!out) throw FormatError("write failed: " + path);
}

FlowField read_flow_flo1(const std::string& path) {
  auto in = open_in(path);
  expect_magic(in, "FLO1", path);
  const auto w = get_le<std::uint32_t>(in, path);
  const auto h = get_le<std::uint32_t>(in, path);
  require_dims(w, h, path);
  FlowField flow;
  flow.dur_ref_us = static_cast<std::int64_t>(get_le<std::uint64_t>(in, path));
  flow.u.resize(h, w);
  flow.v.resize(h, w);
  for (std::uint32_t y = 0; y < h; ++y)
    for (std::uint32_t x = 0; x < w; ++x) {
      flow.u(y, x) = static_cast<Real>(get_le<float>(in, path));
      flow.v(y, x) = static_cast<Real>(get_le<float>(in, path));
    }
  return flow;
}

void write_weights_atc1(const std::string& path, const AttentionWeights& weights) {
  auto out = open_out(path);
  put_magic(out, "ATC1");
  put_le(out, static_cast<std::uint32_t>(weights.channels));
  put_le(out, static_cast<std::uint32_t>(weights.heads));
  put_le(out, weights.seed);
  auto put_matrix = [&out](const MatrixR& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) put_le(out, static_cast<float>(m(r, c)));
  };
  for (int h = 0; h < weights.heads; ++h) {
    put_matrix(weights.wq[static_cast<std::size_t>(h)]);
    put_matrix(weights.wk[static_cast<std::size_t>(h)]);
    put_matrix(weights.wv[static_cast<std::size_t>(h)]);
  }
  put_matrix(weights.wo);
  if (!out) throw FormatError("write failed: " + path);
}

AttentionWeights read_weights_atc1(const std::string& path) {
  auto in = open_in(path);
  expect_magic(in, "ATC1", path);
  AttentionWeights w;
  w.channels = static_cast<int>(get_le<std::uint32_t>(in, path));
  w.heads = static_cast<int>(get_le<std::uint32_t>(in, path));
  if (w.channels <= 0 || w.heads <= 0 || w.channels % w.heads != 0)
    throw FormatError("bad attention dims: " + path);
  w.seed = get_le<std::uint64_t>(in, path);
  const int dh = w.channels / w.heads;
  auto get_matrix = [&in, &path](int rows, int cols) {
    MatrixR m(rows, cols);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) m(r, c) = static_cast<Real>(get_le<float>(in, path));
    return m;
  };
  for (int h = 0; h < w.heads; ++h) {
    w.wq.push_back(get_matrix(w.channels, dh));
    w.wk.push_back(get_matrix(w.channels, dh));
    w.wv.push_back(get_matrix(w.channels, dh));
  }
  w.wo = get_matrix(w.channels, w.channels);
  return w;
}

void write_voxel_vox1(const std::string& path, const VoxelGrid& grid) {
  auto out = open_out(path);
  put_magic(out, "VOX1");
  put_le(out, static_cast<std::uint32_t>(grid.width));
  put_le(out, static_cast<std::uint32_t>(grid.height));
  put_le(out, static_cast<std::uint32_t>(grid.bins));
  put_le(out, grid.t0);
  put_le(out, grid.t1);
  for (const ImageR& plane : grid.data) put_image_f32(out, plane);
  if (!out) throw FormatError("write failed: " + path);
}

VoxelGrid read_voxel_vox1(const std::string& path) {
  auto in = open_in(path);
  expect_magic(in, "VOX1", path);
  const auto w = get_le<std::uint32_t>(in, path);
  const auto h = get_le<std::uint32_t>(in, path);
  require_dims(w, h, path);
  const auto bins = get_le<std::uint32_t>(in, path);
  if (bins == 0 || bins > 64) throw FormatError("implausible bin count: " + path);
  VoxelGrid grid;
  grid.width = static_cast<int>(w);
  grid.height = static_cast<int>(h);
  grid.bins = static_cast<int>(bins);
  grid.t0 = get_le<std::int64_t>(in, path);
  grid.t1 = get_le<std::int64_t>(in, path);
  for (std::uint32_t b = 0; b < bins; ++b)
    grid.data.push_back(get_image_f32(in, grid.height, grid.width, path));
  return grid;
}

void write_labels_csv(const std::string& path, const std::vector<std::uint8_t>& labels) {
  auto out = open_out(path);
  out << "index,label\n";
  for (std::size_t i = 0; i < labels.size(); ++i)
    out << i << ',' << static_cast<int>(labels[i] ? 1 : 0) << '\n';
  if (!out) throw FormatError("write failed: " + path);
}

std::vector<std::uint8_t> read_labels_csv(const std::string& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("index,label", 0) != 0)
    throw FormatError("missing label header: " + path);
  std::vector<std::uint8_t> labels;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    long long idx, value;
    char sep;
    if (!(row >> idx >> sep >> value) || sep != ',' ||
        idx != static_cast<long long>(labels.size()))
      throw FormatError("malformed label row: " + path);
    labels.push_back(value ? 1 : 0);
  }
  return labels;
}

}  // namespace evsup
