#include "khess/jet.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <unordered_map>

#include "khess/errors.hpp"

namespace khess {

namespace {

void enumerate_degree(int nvars, int degree, int var, MultiIndex& current,
                      std::vector<MultiIndex>& out) {
    if (var == nvars - 1) {
        current[var] = static_cast<std::uint8_t>(degree);
        out.push_back(current);
        current[var] = 0;
        return;
    }
    for (int d = degree; d >= 0; --d) {
        current[var] = static_cast<std::uint8_t>(d);
        enumerate_degree(nvars, degree - d, var + 1, current, out);
    }
    current[var] = 0;
}

struct TableCache {
    std::mutex mutex;
    std::map<std::pair<int, int>, std::unique_ptr<MultiIndexTable>> tables;
};

TableCache& table_cache() {
    static TableCache cache;
    return cache;
}

}  // namespace

MultiIndexTable::MultiIndexTable(int nvars, int order) : nvars_(nvars), order_(order) {
    if (nvars < 1 || nvars > kMaxJetVars || order < 0 || order > kMaxJetOrder) {
        throw DomainError("jet table: unsupported (nvars, order)");
    }
    degree_offset_.push_back(0);
    for (int d = 0; d <= order; ++d) {
        MultiIndex current{};
        enumerate_degree(nvars, d, 0, current, indices_);
        degree_.resize(indices_.size(), d);
        degree_offset_.push_back(static_cast<int>(indices_.size()));
    }
    auto encode = [nvars](const MultiIndex& a) {
        std::uint64_t code = 0;
        for (int v = 0; v < nvars; ++v) code |= static_cast<std::uint64_t>(a[v]) << (4 * v);
        return code;
    };
    std::unordered_map<std::uint64_t, int> map;
    map.reserve(indices_.size() * 2);
    for (int i = 0; i < size(); ++i) map.emplace(encode(indices_[i]), i);

    auto find_in = [&](const MultiIndex& a) {
        auto it = map.find(encode(a));
        return it == map.end() ? -1 : it->second;
    };
    for (int i = 0; i < size(); ++i) {
        for (int j = 0; j < degree_offset_[order - degree_[i] + 1]; ++j) {
            MultiIndex sum{};
            for (int v = 0; v < nvars; ++v) sum[v] = indices_[i][v] + indices_[j][v];
            products_.push_back({i, j, find_in(sum)});
        }
    }
    shifts_.resize(nvars);
    for (int v = 0; v < nvars; ++v) {
        for (int t = 0; t < degree_offset_[order]; ++t) {
            MultiIndex up = indices_[t];
            up[v] += 1;
            shifts_[v].emplace_back(find_in(up), t);
        }
    }
}

int MultiIndexTable::find(const MultiIndex& alpha) const {
    int deg = 0;
    for (int v = 0; v < nvars_; ++v) deg += alpha[v];
    if (deg > order_) return -1;
    for (int i = degree_offset_[deg]; i < degree_offset_[deg + 1]; ++i) {
        bool same = true;
        for (int v = 0; v < nvars_ && same; ++v) same = indices_[i][v] == alpha[v];
        if (same) return i;
    }
    return -1;
}

const MultiIndexTable& multi_index_table(int nvars, int order) {
    auto& cache = table_cache();
    std::lock_guard lock(cache.mutex);
    auto& slot = cache.tables[{nvars, order}];
    if (!slot) slot = std::make_unique<MultiIndexTable>(nvars, order);
    return *slot;
}

Jet Jet::constant(int nvars, int order, double value) {
    const auto& t = multi_index_table(nvars, order);
    std::vector<double> c(t.size(), 0.0);
    c[0] = value;
    return Jet(&t, std::move(c));
}

Jet Jet::variable(int nvars, int order, int var, double value) {
    Jet j = constant(nvars, order, value);
    if (order >= 1) {
        MultiIndex a{};
        a[var] = 1;
        j.coeffs_[j.table_->find(a)] = 1.0;
    }
    return j;
}

double Jet::coeff(const MultiIndex& alpha) const {
    const int pos = table_->find(alpha);
    return pos < 0 ? 0.0 : coeffs_[pos];
}

double Jet::derivative(const MultiIndex& alpha) const {
    double factorial = 1.0;
    for (int v = 0; v < nvars(); ++v) {
        for (int k = 2; k <= alpha[v]; ++k) factorial *= k;
    }
    return coeff(alpha) * factorial;
}

double Jet::derivative(int var) const {
    MultiIndex a{};
    a[var] = 1;
    return derivative(a);
}

double Jet::derivative(int var_a, int var_b) const {
    MultiIndex a{};
    a[var_a] += 1;
    a[var_b] += 1;
    return derivative(a);
}

Jet Jet::diff(int var) const {
    if (order() == 0) throw DomainError("jet: cannot differentiate an order-0 jet");
    const auto& t = multi_index_table(nvars(), order() - 1);
    std::vector<double> c(t.size(), 0.0);
    for (const auto& [src, dst] : table_->shifts(var)) {
        c[dst] = coeffs_[src] * (table_->index(dst)[var] + 1);
    }
    return Jet(&t, std::move(c));
}

Jet Jet::truncated(int q) const {
    if (q >= order()) return *this;
    const auto& t = multi_index_table(nvars(), q);
    return Jet(&t, std::vector<double>(coeffs_.begin(), coeffs_.begin() + t.size()));
}

bool Jet::is_constant() const {
    for (std::size_t i = 1; i < coeffs_.size(); ++i) {
        if (coeffs_[i] != 0.0) return false;
    }
    return true;
}

Jet& Jet::operator+=(const Jet& rhs) {
    assert(nvars() == rhs.nvars());
    if (rhs.order() < order()) *this = truncated(rhs.order());
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += rhs.coeffs_[i];
    return *this;
}

Jet& Jet::operator-=(const Jet& rhs) {
    assert(nvars() == rhs.nvars());
    if (rhs.order() < order()) *this = truncated(rhs.order());
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= rhs.coeffs_[i];
    return *this;
}

Jet operator*(const Jet& a, const Jet& b) {
    assert(a.nvars() == b.nvars());
    const Jet& low = a.order() <= b.order() ? a : b;
    const MultiIndexTable& t = *low.table_;
    std::vector<double> c(t.size(), 0.0);
    for (const auto& term : t.products()) c[term.out] += a.coeffs_[term.lhs] * b.coeffs_[term.rhs];
    return Jet(&t, std::move(c));
}

Jet& Jet::operator*=(const Jet& rhs) { return *this = *this * rhs; }
Jet& Jet::operator/=(const Jet& rhs) { return *this = *this * reciprocal(rhs); }

Jet& Jet::operator+=(double rhs) {
    coeffs_[0] += rhs;
    return *this;
}
Jet& Jet::operator-=(double rhs) {
    coeffs_[0] -= rhs;
    return *this;
}
Jet& Jet::operator*=(double rhs) {
    for (double& c : coeffs_) c *= rhs;
    return *this;
}
Jet& Jet::operator/=(double rhs) {
    for (double& c : coeffs_) c /= rhs;
    return *this;
}

Jet operator-(double a, const Jet& b) {
    Jet r = -b;
    r.coeffs_[0] += a;
    return r;
}

Jet operator/(const Jet& a, const Jet& b) { return a * reciprocal(b); }
Jet operator/(double a, const Jet& b) { return reciprocal(b) * a; }

Jet Jet::operator-() const {
    Jet r = *this;
    for (double& c : r.coeffs_) c = -c;
    return r;
}

Jet Jet::compose(std::span<const double> taylor) const {
    // taylor[k] = g^(k)(x0) / k!
    const int q = order();
    Jet delta = *this;
    delta.coeffs_[0] = 0.0;
    Jet r = constant(nvars(), q, taylor[q]);
    for (int k = q - 1; k >= 0; --k) {
        r = r * delta;
        r.coeffs_[0] += taylor[k];
    }
    return r;
}

namespace {

std::vector<double> exp_series(double a, int q) {
    std::vector<double> s(q + 1);
    double f = std::exp(a);
    for (int k = 0; k <= q; ++k) {
        s[k] = f;
        f /= (k + 1);
    }
    return s;
}

// Taylor coefficients of y(a + t) for y' = c0 + c2 y^2.
std::vector<double> riccati_series(double y0, double c0, double c2, int q) {
    std::vector<double> y(q + 1, 0.0);
    y[0] = y0;
    for (int k = 0; k < q; ++k) {
        double sq = 0.0;
        for (int i = 0; i <= k; ++i) sq += y[i] * y[k - i];
        y[k + 1] = ((k == 0 ? c0 : 0.0) + c2 * sq) / (k + 1);
    }
    return y;
}

}  // namespace

Jet exp(const Jet& x) { return x.compose(exp_series(x.value(), x.order())); }

Jet log(const Jet& x) {
    const double a = x.value();
    const int q = x.order();
    std::vector<double> s(q + 1);
    s[0] = std::log(a);
    double p = 1.0;
    for (int k = 1; k <= q; ++k) {
        p /= a;
        s[k] = ((k % 2 == 1) ? 1.0 : -1.0) * p / k;
    }
    return x.compose(s);
}

Jet pow(const Jet& x, double c) {
    const double a = x.value();
    const int q = x.order();
    std::vector<double> s(q + 1);
    double binom = 1.0;  // c choose k
    for (int k = 0; k <= q; ++k) {
        s[k] = binom * std::pow(a, c - k);
        binom *= (c - k) / (k + 1);
    }
    return x.compose(s);
}

Jet sqrt(const Jet& x) { return pow(x, 0.5); }

Jet reciprocal(const Jet& x) {
    const double a = x.value();
    const int q = x.order();
    std::vector<double> s(q + 1);
    double p = 1.0 / a;
    for (int k = 0; k <= q; ++k) {
        s[k] = ((k % 2 == 0) ? 1.0 : -1.0) * p;
        p /= a;
    }
    return x.compose(s);
}

Jet sin(const Jet& x) {
    const double a = x.value();
    const double d[4] = {std::sin(a), std::cos(a), -std::sin(a), -std::cos(a)};
    std::vector<double> s(x.order() + 1);
    double fact = 1.0;
    for (int k = 0; k <= x.order(); ++k) {
        if (k > 0) fact *= k;
        s[k] = d[k % 4] / fact;
    }
    return x.compose(s);
}

Jet cos(const Jet& x) {
    const double a = x.value();
    const double d[4] = {std::cos(a), -std::sin(a), -std::cos(a), std::sin(a)};
    std::vector<double> s(x.order() + 1);
    double fact = 1.0;
    for (int k = 0; k <= x.order(); ++k) {
        if (k > 0) fact *= k;
        s[k] = d[k % 4] / fact;
    }
    return x.compose(s);
}

Jet tan(const Jet& x) { return x.compose(riccati_series(std::tan(x.value()), 1.0, 1.0, x.order())); }
Jet tanh(const Jet& x) {
    return x.compose(riccati_series(std::tanh(x.value()), 1.0, -1.0, x.order()));
}

Jet atan(const Jet& x) {
    // atan(a + t) = atan(a) + integral of 1 / (1 + (a + t)^2).
    const double a = x.value();
    const int q = x.order();
    std::vector<double> den(q + 1, 0.0);
    den[0] = 1.0 + a * a;
    if (q >= 1) den[1] = 2.0 * a;
    if (q >= 2) den[2] = 1.0;
    std::vector<double> inv(q + 1, 0.0);
    inv[0] = 1.0 / den[0];
    for (int k = 1; k <= q; ++k) {
        double acc = 0.0;
        for (int i = 1; i <= std::min(k, 2); ++i) acc += den[i] * inv[k - i];
        inv[k] = -acc / den[0];
    }
    std::vector<double> s(q + 1);
    s[0] = std::atan(a);
    for (int k = 1; k <= q; ++k) s[k] = inv[k - 1] / k;
    return x.compose(s);
}

Jet abs(const Jet& x) { return x.value() < 0.0 ? -x : x; }

Jet substitute(const Jet& outer, std::span<const double> center, std::span<const Jet> inner) {
    const int m = outer.nvars();
    assert(static_cast<int>(center.size()) == m && static_cast<int>(inner.size()) == m);
    const int nv = inner[0].nvars();
    int q = inner[0].order();
    for (const auto& j : inner) q = std::min(q, j.order());
    std::vector<Jet> delta;
    delta.reserve(m);
    bool all_constant = true;
    for (int i = 0; i < m; ++i) {
        Jet d = inner[i].truncated(q) - center[i];
        if (!d.is_constant()) all_constant = false;
        delta.push_back(std::move(d));
    }
    const MultiIndexTable& t = outer.table();
    if (all_constant) {
        // Plain polynomial evaluation at a point.
        double v = 0.0;
        std::vector<double> mono(t.size(), 1.0);
        for (int pos = 0; pos < t.size(); ++pos) {
            if (pos > 0) {
                const auto& a = t.index(pos);
                int v0 = 0;
                while (a[v0] == 0) ++v0;
                MultiIndex prev = a;
                prev[v0] -= 1;
                mono[pos] = mono[t.find(prev)] * delta[v0].value();
            }
            v += outer.coeffs()[pos] * mono[pos];
        }
        return Jet::constant(nv, q, v);
    }
    std::vector<Jet> mono(t.size());
    Jet result = Jet::constant(nv, q, 0.0);
    for (int pos = 0; pos < t.size(); ++pos) {
        if (pos == 0) {
            mono[0] = Jet::constant(nv, q, 1.0);
        } else {
            const auto& a = t.index(pos);
            int v0 = 0;
            while (a[v0] == 0) ++v0;
            MultiIndex prev = a;
            prev[v0] -= 1;
            mono[pos] = mono[t.find(prev)] * delta[v0];
        }
        if (outer.coeffs()[pos] != 0.0) result += mono[pos] * outer.coeffs()[pos];
    }
    return result;
}

Jet embed(const Jet& src, int nvars, std::span<const int> target_var) {
    Jet out = Jet::constant(nvars, src.order(), 0.0);
    const MultiIndexTable& ts = src.table();
    const MultiIndexTable& tt = out.table();
    for (int pos = 0; pos < ts.size(); ++pos) {
        MultiIndex a{};
        for (int v = 0; v < ts.nvars(); ++v) a[target_var[v]] += ts.index(pos)[v];
        out.coeffs()[tt.find(a)] += src.coeffs()[pos];
    }
    return out;
}

}  // namespace khess
