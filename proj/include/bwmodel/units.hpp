#pragma once

// Dimensioned quantities and the unit-suffixed string grammar shared by the
// config file, the CLI and the HTTP API.
//
// Capacities and bandwidths use binary prefixes throughout (1 GB = 2^30 B);
// power and energy prefixes are decimal (1 kW = 1000 W).

#include <array>
#include <charconv>
#include <cmath>
#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>

namespace bwmodel {

class InvalidInputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A double carrying its dimension as exponents of bytes, seconds and watts.
/// Arithmetic is exactly the underlying double arithmetic.
template <int ByteExp, int SecExp, int WattExp>
class Quantity {
 public:
  constexpr Quantity() = default;
  constexpr explicit Quantity(double v) : v_(v) {}

  [[nodiscard]] constexpr double value() const { return v_; }

  constexpr Quantity& operator+=(Quantity o) {
    v_ += o.v_;
    return *this;
  }
  constexpr Quantity& operator-=(Quantity o) {
    v_ -= o.v_;
    return *this;
  }
  friend constexpr Quantity operator+(Quantity a, Quantity b) { return Quantity(a.v_ + b.v_); }
  friend constexpr Quantity operator-(Quantity a, Quantity b) { return Quantity(a.v_ - b.v_); }
  friend constexpr Quantity operator-(Quantity a) { return Quantity(-a.v_); }
  friend constexpr Quantity operator*(Quantity a, double k) { return Quantity(a.v_ * k); }
  friend constexpr Quantity operator*(double k, Quantity a) { return Quantity(k * a.v_); }
  friend constexpr Quantity operator/(Quantity a, double k) { return Quantity(a.v_ / k); }

  friend constexpr auto operator<=>(Quantity, Quantity) = default;
  friend constexpr bool operator==(Quantity, Quantity) = default;

 private:
  double v_ = 0.0;
};

template <int B1, int S1, int W1, int B2, int S2, int W2>
constexpr auto operator*(Quantity<B1, S1, W1> a, Quantity<B2, S2, W2> b) {
  if constexpr (B1 + B2 == 0 && S1 + S2 == 0 && W1 + W2 == 0) {
    return a.value() * b.value();
  } else {
    return Quantity<B1 + B2, S1 + S2, W1 + W2>(a.value() * b.value());
  }
}

template <int B1, int S1, int W1, int B2, int S2, int W2>
constexpr auto operator/(Quantity<B1, S1, W1> a, Quantity<B2, S2, W2> b) {
  if constexpr (B1 == B2 && S1 == S2 && W1 == W2) {
    return a.value() / b.value();
  } else {
    return Quantity<B1 - B2, S1 - S2, W1 - W2>(a.value() / b.value());
  }
}

using Bytes = Quantity<1, 0, 0>;
using Seconds = Quantity<0, 1, 0>;
using Watts = Quantity<0, 0, 1>;
using BytesPerSecond = Quantity<1, -1, 0>;
using Joules = Quantity<0, 1, 1>;
using PerSecond = Quantity<0, -1, 0>;

inline constexpr double kKiB = 1024.0;
inline constexpr double kMiB = kKiB * 1024.0;
inline constexpr double kGiB = kMiB * 1024.0;
inline constexpr double kTiB = kGiB * 1024.0;

namespace literals {
constexpr Bytes operator""_B(long double v) { return Bytes(static_cast<double>(v)); }
constexpr Bytes operator""_B(unsigned long long v) { return Bytes(static_cast<double>(v)); }
constexpr Bytes operator""_GB(long double v) { return Bytes(static_cast<double>(v) * kGiB); }
constexpr Bytes operator""_GB(unsigned long long v) { return Bytes(static_cast<double>(v) * kGiB); }
constexpr Bytes operator""_TB(long double v) { return Bytes(static_cast<double>(v) * kTiB); }
constexpr Bytes operator""_TB(unsigned long long v) { return Bytes(static_cast<double>(v) * kTiB); }
constexpr BytesPerSecond operator""_GBps(long double v) {
  return BytesPerSecond(static_cast<double>(v) * kGiB);
}
constexpr BytesPerSecond operator""_GBps(unsigned long long v) {
  return BytesPerSecond(static_cast<double>(v) * kGiB);
}
constexpr BytesPerSecond operator""_TBps(long double v) {
  return BytesPerSecond(static_cast<double>(v) * kTiB);
}
constexpr BytesPerSecond operator""_TBps(unsigned long long v) {
  return BytesPerSecond(static_cast<double>(v) * kTiB);
}
constexpr Watts operator""_W(long double v) { return Watts(static_cast<double>(v)); }
constexpr Watts operator""_W(unsigned long long v) { return Watts(static_cast<double>(v)); }
constexpr Watts operator""_kW(long double v) { return Watts(static_cast<double>(v) * 1e3); }
constexpr Watts operator""_kW(unsigned long long v) { return Watts(static_cast<double>(v) * 1e3); }
constexpr Watts operator""_MW(long double v) { return Watts(static_cast<double>(v) * 1e6); }
constexpr Watts operator""_MW(unsigned long long v) { return Watts(static_cast<double>(v) * 1e6); }
constexpr Seconds operator""_s(long double v) { return Seconds(static_cast<double>(v)); }
constexpr Seconds operator""_s(unsigned long long v) { return Seconds(static_cast<double>(v)); }
constexpr Seconds operator""_ms(long double v) { return Seconds(static_cast<double>(v) * 1e-3); }
constexpr Seconds operator""_ms(unsigned long long v) {
  return Seconds(static_cast<double>(v) * 1e-3);
}
}  // namespace literals

enum class QuantityKind { bytes, bandwidth, power, time, energy };

namespace detail {

struct UnitSuffix {
  std::string_view suffix;  // lower case
  double scale;
};

inline constexpr std::array<UnitSuffix, 5> kByteSuffixes{{
    {"tb", kTiB}, {"gb", kGiB}, {"mb", kMiB}, {"kb", kKiB}, {"b", 1.0}}};
inline constexpr std::array<UnitSuffix, 3> kPowerSuffixes{{{"mw", 1e6}, {"kw", 1e3}, {"w", 1.0}}};
inline constexpr std::array<UnitSuffix, 2> kTimeSuffixes{{{"ms", 1e-3}, {"s", 1.0}}};
inline constexpr std::array<UnitSuffix, 3> kEnergySuffixes{{{"mj", 1e6}, {"kj", 1e3}, {"j", 1.0}}};

inline std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

inline const char* kind_name(QuantityKind kind) {
  switch (kind) {
    case QuantityKind::bytes: return "size (B, KB, MB, GB, TB)";
    case QuantityKind::bandwidth: return "bandwidth (B..TB, optionally /s)";
    case QuantityKind::power: return "power (W, kW, MW)";
    case QuantityKind::time: return "time (ms, s)";
    case QuantityKind::energy: return "energy (J, kJ, MJ)";
  }
  return "quantity";
}

template <std::size_t N>
bool match_suffix(std::string_view unit, const std::array<UnitSuffix, N>& table, double& scale) {
  for (const auto& u : table) {
    if (unit == u.suffix) {
      scale = u.scale;
      return true;
    }
  }
  return false;
}

inline std::string shortest(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc{}) throw std::runtime_error("number formatting failed");
  return std::string(buf.data(), ptr);
}

}  // namespace detail

/// Parses a plain decimal number (no unit). Rejects trailing garbage, NaN and infinities.
inline double parse_number(std::string_view text) {
  auto t = detail::trim(text);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty() || !std::isfinite(v)) {
    throw InvalidInputError("not a number: '" + std::string(text) + "'");
  }
  return v;
}

/// Parses "<number><unit>" into the quantity's base unit (B, B/s, W, s or J).
/// Suffixes are case-insensitive. A bare number is accepted only when
/// allow_bare is set and is then taken to be in the base unit.
inline double parse_quantity(std::string_view text, QuantityKind kind, bool allow_bare = false) {
  auto t = detail::trim(text);
  std::size_t split = t.size();
  while (split > 0) {
    char c = t[split - 1];
    bool alpha = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '/';
    if (!alpha) break;
    --split;
  }
  auto number_part = detail::trim(t.substr(0, split));
  auto unit = detail::lower(t.substr(split));

  double value = 0.0;
  try {
    value = parse_number(number_part);
  } catch (const InvalidInputError&) {
    throw InvalidInputError("malformed " + std::string(detail::kind_name(kind)) + ": '" +
                            std::string(text) + "'");
  }
  if (unit.empty()) {
    if (!allow_bare) {
      throw InvalidInputError("missing unit in " + std::string(detail::kind_name(kind)) + ": '" +
                              std::string(text) + "'");
    }
    return value;
  }

  double scale = 0.0;
  bool ok = false;
  switch (kind) {
    case QuantityKind::bytes: ok = detail::match_suffix(unit, detail::kByteSuffixes, scale); break;
    case QuantityKind::bandwidth: {
      std::string_view u = unit;
      if (u.size() > 2 && u.substr(u.size() - 2) == "/s") u.remove_suffix(2);
      ok = detail::match_suffix(u, detail::kByteSuffixes, scale);
      break;
    }
    case QuantityKind::power: ok = detail::match_suffix(unit, detail::kPowerSuffixes, scale); break;
    case QuantityKind::time: ok = detail::match_suffix(unit, detail::kTimeSuffixes, scale); break;
    case QuantityKind::energy: ok = detail::match_suffix(unit, detail::kEnergySuffixes, scale); break;
  }
  if (!ok) {
    throw InvalidInputError("unknown unit '" + std::string(t.substr(split)) + "' for " +
                            detail::kind_name(kind) + ": '" + std::string(text) + "'");
  }
  return value * scale;
}

inline Bytes parse_bytes(std::string_view s) { return Bytes(parse_quantity(s, QuantityKind::bytes)); }
inline BytesPerSecond parse_bandwidth(std::string_view s) {
  return BytesPerSecond(parse_quantity(s, QuantityKind::bandwidth));
}
inline Watts parse_power(std::string_view s) { return Watts(parse_quantity(s, QuantityKind::power)); }
inline Seconds parse_time(std::string_view s) { return Seconds(parse_quantity(s, QuantityKind::time)); }
inline Joules parse_energy(std::string_view s) {
  return Joules(parse_quantity(s, QuantityKind::energy));
}

/// Shortest decimal text that parses back to exactly `v`.
inline std::string format_number(double v) { return detail::shortest(v); }

// Machine formats: lossless, i.e. parse_*(format_*(x)) == x bit for bit.
// Bytes pick the largest binary prefix not exceeding the value; dividing by a
// power of two is exact, so the round trip holds for any prefix.

inline std::string format_bytes(Bytes b) {
  double v = b.value();
  for (const auto& u : detail::kByteSuffixes) {
    if (std::fabs(v) >= u.scale || u.scale == 1.0) {
      std::string unit(u.suffix);
      for (auto& c : unit) c = static_cast<char>(c - 'a' + 'A');
      return detail::shortest(v / u.scale) + unit;
    }
  }
  return detail::shortest(v) + "B";
}

inline std::string format_bandwidth(BytesPerSecond bw) { return format_bytes(Bytes(bw.value())) + "/s"; }
inline std::string format_power(Watts w) { return detail::shortest(w.value()) + "W"; }
inline std::string format_time(Seconds s) { return detail::shortest(s.value()) + "s"; }
inline std::string format_energy(Joules j) { return detail::shortest(j.value()) + "J"; }

/// Human format: three significant digits with a scaled unit.
inline std::string humanize(double v, QuantityKind kind) {
  auto sig3 = [](double x) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x,
                                   std::chars_format::general, 3);
    (void)ec;
    return std::string(buf.data(), ptr);
  };
  switch (kind) {
    case QuantityKind::bytes:
    case QuantityKind::bandwidth: {
      const char* tail = kind == QuantityKind::bandwidth ? "/s" : "";
      for (const auto& u : detail::kByteSuffixes) {
        if (std::fabs(v) >= u.scale || u.scale == 1.0) {
          std::string unit(u.suffix);
          for (auto& c : unit) c = static_cast<char>(c - 'a' + 'A');
          return sig3(v / u.scale) + " " + unit + tail;
        }
      }
      break;
    }
    case QuantityKind::power:
      if (std::fabs(v) >= 1e6) return sig3(v / 1e6) + " MW";
      if (std::fabs(v) >= 1e3) return sig3(v / 1e3) + " kW";
      return sig3(v) + " W";
    case QuantityKind::energy:
      if (std::fabs(v) >= 1e6) return sig3(v / 1e6) + " MJ";
      if (std::fabs(v) >= 1e3) return sig3(v / 1e3) + " kJ";
      return sig3(v) + " J";
    case QuantityKind::time:
      if (std::fabs(v) < 1.0) return sig3(v * 1e3) + " ms";
      return sig3(v) + " s";
  }
  return sig3(v);
}

}  // namespace bwmodel
