#pragma once

#include <complex>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace lacelab {

class LatticePoint {
public:
    LatticePoint() = default;
    explicit LatticePoint(std::vector<int> coords) : c_(std::move(coords)) {}
    LatticePoint(std::initializer_list<int> coords) : c_(coords) {}

    static LatticePoint origin(int d) { return LatticePoint(std::vector<int>(d, 0)); }
    static LatticePoint axis(int d, int j, int length = 1);

    int dim() const { return static_cast<int>(c_.size()); }
    int operator[](int j) const { return c_[j]; }
    int& operator[](int j) { return c_[j]; }
    const std::vector<int>& coords() const { return c_; }

    long long norm2() const;
    double norm() const;
    // |||x||| = max(|x|, 1)
    double clamped_norm() const;
    int l1() const;
    bool is_origin() const;

    // Representative of the hyperoctahedral orbit: absolute values sorted descending.
    LatticePoint canonical() const;
    // Number of lattice points in the orbit of this point.
    std::int64_t orbit_size() const;

    auto operator<=>(const LatticePoint&) const = default;

private:
    std::vector<int> c_;
};

std::ostream& operator<<(std::ostream& os, const LatticePoint& x);

// Dense field on the torus of odd side L; sites -(L-1)/2 .. (L-1)/2 per axis,
// stored row-major with the first coordinate slowest.
class LatticeField {
public:
    LatticeField() = default;
    LatticeField(int d, int L, bool symmetric = false);

    static LatticeField delta(int d, int L);

    int dim() const { return d_; }
    int side() const { return L_; }
    int half() const { return (L_ - 1) / 2; }
    std::size_t size() const { return values_.size(); }
    bool symmetric() const { return symmetric_; }
    void set_symmetric(bool s) { symmetric_ = s; }

    std::span<double> values() { return values_; }
    std::span<const double> values() const { return values_; }

    int wrap(int c) const;
    std::size_t index(std::span<const int> x) const;
    std::size_t index(const LatticePoint& x) const { return index(std::span<const int>(x.coords())); }
    LatticePoint point(std::size_t idx) const;
    void coords(std::size_t idx, std::span<int> out) const;

    double operator()(const LatticePoint& x) const { return values_[index(x)]; }
    double& operator[](const LatticePoint& x) { return values_[index(x)]; }
    double operator[](std::size_t i) const { return values_[i]; }
    double& operator[](std::size_t i) { return values_[i]; }

    double sum() const;
    double abs_sum() const;
    double max() const;
    double max_abs() const;
    bool same_shape(const LatticeField& o) const { return d_ == o.d_ && L_ == o.L_; }

    LatticeField& operator+=(const LatticeField& o);
    LatticeField& operator-=(const LatticeField& o);
    LatticeField& operator*=(double s);

private:
    int d_ = 0;
    int L_ = 0;
    bool symmetric_ = false;
    std::vector<double> values_;
};

LatticeField operator+(LatticeField a, const LatticeField& b);
LatticeField operator-(LatticeField a, const LatticeField& b);
LatticeField operator*(double s, LatticeField a);

// Midpoint Fourier grid k_j = 2pi(m + 1/2)/M - pi. M is even so k = 0 is never a node.
class FourierGrid {
public:
    FourierGrid(int d, int M);
    int dim() const { return d_; }
    int points() const { return M_; }
    std::size_t size() const;
    double node(int m) const;
    std::vector<double> wavevector(std::size_t idx) const;

private:
    int d_;
    int M_;
};

using FourierValues = std::vector<std::complex<double>>;

LatticeField convolve(const LatticeField& f, const LatticeField& g);
LatticeField convolve_direct(const LatticeField& f, const LatticeField& g);
LatticeField convolution_power(const LatticeField& f, int n);

struct WeightMode {
    enum Kind { full, axis } kind = full;
    int axis_index = 0;
};

LatticeField weighted_field(const LatticeField& f, double alpha, WeightMode mode = {});

FourierValues fourier_eval(const LatticeField& f, const FourierGrid& grid);

// Sampled orbit check: true if f(x) == f(gx) within tol for `samples` random (x, g).
bool check_symmetry(const LatticeField& f, int samples = 256, std::uint64_t seed = 1, double tol = 1e-12);
LatticeField symmetrize(const LatticeField& f);

// Share of sum |f| sitting at Euclidean distance greater than (L-1)/2.
double outside_radius_mass(const LatticeField& f);
// Share of sum |f| on the outermost shell max_j |x_j| = (L-1)/2.
double boundary_shell_mass(const LatticeField& f);

// (f*g)(x) with f given analytically and g finitely supported on its box.
double convolve_at(const std::function<double(const LatticePoint&)>& f, const LatticeField& g, const LatticePoint& x);

void write_field(std::ostream& os, const LatticeField& f);
LatticeField read_field(std::istream& is);
void write_csv(std::ostream& os, const LatticeField& f);

}  // namespace lacelab
