#include "obusim/cpm.hpp"

#include <bit>
#include <limits>

#include "obusim/errors.hpp"

namespace obusim {
namespace {

class Writer {
 public:
  explicit Writer(Bytes& out) : out_(out) {}

  void u16(std::uint16_t v) { put(v, 2); }
  void u32(std::uint32_t v) { put(v, 4); }
  void f64(double v) { put(std::bit_cast<std::uint64_t>(v), 8); }

 private:
  void put(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  Bytes& out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

  std::uint16_t u16() { return static_cast<std::uint16_t>(get(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
  double f64() { return std::bit_cast<double>(get(8)); }
  std::size_t remaining() const { return in_.size() - pos_; }

 private:
  std::uint64_t get(int n) {
    if (remaining() < static_cast<std::size_t>(n)) {
      throw ParseError("truncated CPM at byte " + std::to_string(pos_), 0);
    }
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= std::uint64_t{in_[pos_ + i]} << (8 * i);
    pos_ += n;
    return v;
  }
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

std::uint32_t tick_field(Tick t, const char* what) {
  if (t < 0 || t > std::numeric_limits<std::uint32_t>::max()) {
    throw ValidationError(std::string(what) + " " + std::to_string(t) + " does not fit in u32");
  }
  return static_cast<std::uint32_t>(t);
}

}  // namespace

Bytes serialize(const Cpm& cpm) {
  if (cpm.objects.size() > std::numeric_limits<std::uint16_t>::max()) {
    throw ValidationError("CPM carries more than 65535 objects");
  }
  Bytes out;
  out.reserve(wire_size(cpm.objects.size()));
  Writer w(out);
  w.u32(cpm.sender_station);
  w.u32(tick_field(cpm.gen_tick, "gen_tick"));
  w.f64(cpm.sender_x);
  w.f64(cpm.sender_y);
  w.f64(cpm.sender_heading);
  w.u16(static_cast<std::uint16_t>(cpm.objects.size()));
  for (const auto& o : cpm.objects) {
    w.u32(o.plate);
    w.f64(o.x);
    w.f64(o.y);
    w.f64(o.heading);
    w.u32(tick_field(o.observed_tick, "observed_tick"));
  }
  return out;
}

Cpm deserialize(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  Cpm cpm;
  cpm.sender_station = r.u32();
  cpm.gen_tick = r.u32();
  cpm.sender_x = r.f64();
  cpm.sender_y = r.f64();
  cpm.sender_heading = r.f64();
  const std::size_t count = r.u16();
  cpm.objects.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    PerceivedObject o;
    o.plate = r.u32();
    o.x = r.f64();
    o.y = r.f64();
    o.heading = r.f64();
    o.observed_tick = r.u32();
    cpm.objects.push_back(o);
  }
  if (r.remaining() != 0) {
    throw ParseError("trailing bytes after CPM payload", 0);
  }
  return cpm;
}

Cpm strip_extensions(Cpm cpm) {
  cpm.extensions.clear();
  return cpm;
}

}  // namespace obusim
