#pragma once

#include <compare>

namespace evfield {

// Repo-wide units: eV, nm, s, rad, V. Each dimension is its own type so raw
// doubles cannot cross an API boundary in the wrong unit.
template <class Tag>
class Quantity
{
  public:
    constexpr Quantity() = default;
    constexpr explicit Quantity(double value) : value_(value) {}

    [[nodiscard]] constexpr double value() const { return value_; }

    friend constexpr auto operator<=>(Quantity, Quantity) = default;

    constexpr Quantity operator-() const { return Quantity(-value_); }
    constexpr Quantity& operator+=(Quantity rhs)
    {
        value_ += rhs.value_;
        return *this;
    }
    constexpr Quantity& operator-=(Quantity rhs)
    {
        value_ -= rhs.value_;
        return *this;
    }

    friend constexpr Quantity operator+(Quantity a, Quantity b) { return Quantity(a.value_ + b.value_); }
    friend constexpr Quantity operator-(Quantity a, Quantity b) { return Quantity(a.value_ - b.value_); }
    friend constexpr Quantity operator*(Quantity a, double s) { return Quantity(a.value_ * s); }
    friend constexpr Quantity operator*(double s, Quantity a) { return Quantity(a.value_ * s); }
    friend constexpr Quantity operator/(Quantity a, double s) { return Quantity(a.value_ / s); }
    friend constexpr double operator/(Quantity a, Quantity b) { return a.value_ / b.value_; }

  private:
    double value_ = 0.0;
};

namespace tags {
struct Energy;
struct Length;
struct Time;
struct Phase;
struct Voltage;
struct EnergyLength;
} // namespace tags

using Energy = Quantity<tags::Energy>;             //!< eV
using Length = Quantity<tags::Length>;             //!< nm
using Time = Quantity<tags::Time>;                 //!< s
using Phase = Quantity<tags::Phase>;               //!< rad
using Voltage = Quantity<tags::Voltage>;           //!< V
using EnergyLength = Quantity<tags::EnergyLength>; //!< eV*nm

constexpr Length operator/(EnergyLength k, Energy e) { return Length(k.value() / e.value()); }
constexpr Energy operator/(EnergyLength k, Length l) { return Energy(k.value() / l.value()); }
constexpr EnergyLength operator*(Length l, Energy e) { return EnergyLength(l.value() * e.value()); }
constexpr EnergyLength operator*(Energy e, Length l) { return EnergyLength(l.value() * e.value()); }

namespace literals {
constexpr Energy operator""_eV(long double v) { return Energy(static_cast<double>(v)); }
constexpr Energy operator""_eV(unsigned long long v) { return Energy(static_cast<double>(v)); }
constexpr Length operator""_nm(long double v) { return Length(static_cast<double>(v)); }
constexpr Length operator""_nm(unsigned long long v) { return Length(static_cast<double>(v)); }
constexpr Phase operator""_rad(long double v) { return Phase(static_cast<double>(v)); }
constexpr Phase operator""_rad(unsigned long long v) { return Phase(static_cast<double>(v)); }
constexpr Voltage operator""_V(long double v) { return Voltage(static_cast<double>(v)); }
constexpr Voltage operator""_V(unsigned long long v) { return Voltage(static_cast<double>(v)); }
constexpr EnergyLength operator""_eVnm(long double v) { return EnergyLength(static_cast<double>(v)); }
constexpr EnergyLength operator""_eVnm(unsigned long long v) { return EnergyLength(static_cast<double>(v)); }
} // namespace literals

} // namespace evfield
