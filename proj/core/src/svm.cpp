#include "lesionfuse/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "csv.hpp"
#include "lesionfuse/errors.hpp"
#include "lesionfuse/metrics.hpp"

namespace lesionfuse {

namespace {

constexpr double kKktTol = 1e-3;
constexpr std::size_t kMaxUpdates = 1000000;
constexpr double kAlphaTol = 1e-12;

double rbf(std::span<const double> a, std::span<const double> b, double gamma) {
    double ss = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        ss += d * d;
    }
    return std::exp(-gamma * ss);
}

void check_finite(const Matrix& X, const char* who) {
    for (double v : X.data())
        if (!std::isfinite(v)) throw DataError(std::string(who) + ": non-finite feature value");
}

}  // namespace

BinarySvm train_binary(const Matrix& X, const std::vector<int>& y, const KernelParams& p) {
    const std::size_t n = X.rows();
    if (n != y.size()) throw DataError("train_binary: label count mismatch");
    if (n < 2) throw DataError("train_binary: need at least 2 samples");
    if (!(p.C > 0) || !(p.gamma > 0))
        throw ConfigError("train_binary: C and gamma must be > 0");
    check_finite(X, "train_binary");

    bool has_pos = false, has_neg = false;
    for (int v : y) {
        if (v == 1) has_pos = true;
        else if (v == -1) has_neg = true;
        else throw DataError("train_binary: labels must be -1 or +1");
    }
    if (!has_pos || !has_neg) throw DataError("train_binary: single-class input");

    // Full kernel matrix; problem sizes here never justify a cache.
    std::vector<double> K(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        K[i * n + i] = 1.0;
        for (std::size_t j = i + 1; j < n; ++j) {
            const double k = rbf(X.row(i), X.row(j), p.gamma);
            K[i * n + j] = k;
            K[j * n + i] = k;
        }
    }

    // Minimize 1/2 a'Qa - e'a with Q_ij = y_i y_j K_ij, 0 <= a <= C,
    // sum a_i y_i = 0. grad_i = (Qa)_i - 1; the working pair is the
    // maximal violating one.
    std::vector<double> alpha(n, 0.0);
    std::vector<double> grad(n, -1.0);
    const double C = p.C;

    const auto in_up = [&](std::size_t t) {
        return (y[t] == 1 && alpha[t] < C - kAlphaTol) || (y[t] == -1 && alpha[t] > kAlphaTol);
    };
    const auto in_low = [&](std::size_t t) {
        return (y[t] == 1 && alpha[t] > kAlphaTol) || (y[t] == -1 && alpha[t] < C - kAlphaTol);
    };

    double m_up = 0.0, m_low = 0.0;
    for (std::size_t iter = 0; iter < kMaxUpdates; ++iter) {
        std::ptrdiff_t i = -1, j = -1;
        m_up = -std::numeric_limits<double>::infinity();
        m_low = std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < n; ++t) {
            const double v = -y[t] * grad[t];
            if (in_up(t) && v > m_up) {
                m_up = v;
                i = static_cast<std::ptrdiff_t>(t);
            }
            if (in_low(t) && v < m_low) {
                m_low = v;
                j = static_cast<std::ptrdiff_t>(t);
            }
        }
        if (i < 0 || j < 0 || m_up - m_low <= kKktTol) break;

        const auto ii = static_cast<std::size_t>(i);
        const auto jj = static_cast<std::size_t>(j);
        double quad = K[ii * n + ii] + K[jj * n + jj] - 2.0 * K[ii * n + jj];
        if (quad <= 0) quad = 1e-12;
        double step = (m_up - m_low) / quad;

        // Box caps along the feasible direction a_i += y_i t, a_j -= y_j t.
        const double cap_i = y[ii] == 1 ? C - alpha[ii] : alpha[ii];
        const double cap_j = y[jj] == 1 ? alpha[jj] : C - alpha[jj];
        step = std::min({step, cap_i, cap_j});
        if (step <= 0) break;

        alpha[ii] += y[ii] * step;
        alpha[jj] -= y[jj] * step;
        for (std::size_t t = 0; t < n; ++t)
            grad[t] += y[t] * step * (K[t * n + ii] - K[t * n + jj]);
    }

    // Bias from the free vectors, or the midpoint of the feasible interval.
    double free_sum = 0.0;
    std::size_t free_count = 0;
    for (std::size_t t = 0; t < n; ++t) {
        if (alpha[t] > 1e-8 && alpha[t] < C - 1e-8) {
            free_sum += -y[t] * grad[t];
            ++free_count;
        }
    }
    const double bias = free_count > 0 ? free_sum / static_cast<double>(free_count)
                                       : (m_up + m_low) / 2.0;

    BinarySvm model;
    model.params = p;
    model.bias = bias;
    std::vector<std::size_t> sv;
    for (std::size_t t = 0; t < n; ++t)
        if (alpha[t] > kAlphaTol) sv.push_back(t);
    model.support_vectors = Matrix(sv.size(), X.cols());
    model.dual_coef.resize(sv.size());
    for (std::size_t s = 0; s < sv.size(); ++s) {
        for (std::size_t c = 0; c < X.cols(); ++c)
            model.support_vectors(s, c) = X(sv[s], c);
        model.dual_coef[s] = alpha[sv[s]] * y[sv[s]];
    }
    return model;
}

double decision_value(const BinarySvm& m, std::span<const double> x) {
    if (x.size() != m.support_vectors.cols() && m.support_vectors.rows() > 0)
        throw DataError("decision_value: dimension mismatch");
    double acc = m.bias;
    for (std::size_t s = 0; s < m.support_vectors.rows(); ++s)
        acc += m.dual_coef[s] * rbf(m.support_vectors.row(s), x, m.params.gamma);
    return acc;
}

std::vector<double> Standardizer::apply(std::span<const double> row) const {
    if (row.size() != mean.size()) throw DataError("standardizer: dimension mismatch");
    std::vector<double> out(row.size());
    for (std::size_t i = 0; i < row.size(); ++i) out[i] = (row[i] - mean[i]) / scale[i];
    return out;
}

Standardizer fit_standardizer(const Matrix& X) {
    const std::size_t n = X.rows();
    const std::size_t d = X.cols();
    Standardizer s;
    s.mean.assign(d, 0.0);
    s.scale.assign(d, 1.0);
    if (n == 0) return s;
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < d; ++c) s.mean[c] += X(r, c);
    for (double& m : s.mean) m /= static_cast<double>(n);
    if (n >= 2) {
        for (std::size_t c = 0; c < d; ++c) {
            double ss = 0.0;
            for (std::size_t r = 0; r < n; ++r) {
                const double dv = X(r, c) - s.mean[c];
                ss += dv * dv;
            }
            const double sd = std::sqrt(ss / static_cast<double>(n - 1));
            if (sd > 0) s.scale[c] = sd;
        }
    }
    return s;
}

namespace {

Matrix standardize_all(const Standardizer& s, const Matrix& X) {
    Matrix out(X.rows(), X.cols());
    for (std::size_t r = 0; r < X.rows(); ++r) {
        const auto row = s.apply(X.row(r));
        for (std::size_t c = 0; c < X.cols(); ++c) out(r, c) = row[c];
    }
    return out;
}

}  // namespace

OvaSvm train_ova(const Matrix& X, const std::vector<int>& labels,
                 const std::vector<std::string>& class_names, const KernelParams& p) {
    const std::size_t C = class_names.size();
    if (C < 2) throw DataError("train_ova: need at least 2 classes");
    if (X.rows() != labels.size()) throw DataError("train_ova: label count mismatch");

    std::vector<std::size_t> per_class(C, 0);
    for (int l : labels) {
        if (l < 0 || static_cast<std::size_t>(l) >= C)
            throw DataError("train_ova: label out of range");
        ++per_class[static_cast<std::size_t>(l)];
    }
    for (std::size_t c = 0; c < C; ++c)
        if (per_class[c] == 0)
            throw DataError("train_ova: class '" + class_names[c] + "' has no training samples");

    OvaSvm model;
    model.class_names = class_names;
    model.standardizer = fit_standardizer(X);
    const Matrix Xs = standardize_all(model.standardizer, X);

    model.machines.reserve(C);
    std::vector<int> y(labels.size());
    for (std::size_t c = 0; c < C; ++c) {
        for (std::size_t i = 0; i < labels.size(); ++i)
            y[i] = labels[i] == static_cast<int>(c) ? 1 : -1;
        model.machines.push_back(train_binary(Xs, y, p));
    }
    return model;
}

ScoreMatrix score_matrix(const OvaSvm& m, const Matrix& X,
                         const std::vector<std::string>& ids, const std::string& member_id) {
    if (X.rows() != ids.size()) throw DataError("score_matrix: id count mismatch");
    if (X.rows() > 0 && X.cols() != m.dim())
        throw DataError("score_matrix: feature dim " + std::to_string(X.cols()) +
                        " does not match model dim " + std::to_string(m.dim()));
    ScoreMatrix s;
    s.member_id = member_id;
    s.ids = ids;
    s.class_names = m.class_names;
    s.scores = Matrix(X.rows(), m.num_classes());
    for (std::size_t r = 0; r < X.rows(); ++r) {
        const auto row = m.standardizer.apply(X.row(r));
        for (std::size_t c = 0; c < m.num_classes(); ++c)
            s.scores(r, c) = decision_value(m.machines[c], row);
    }
    return s;
}

std::vector<double> default_c_grid() { return {0.01, 0.1, 1.0, 10.0, 100.0}; }

std::vector<double> default_gamma_grid(std::size_t dim) {
    std::vector<double> g;
    for (int e = -7; e <= 3; ++e)
        g.push_back(std::ldexp(1.0, e) / static_cast<double>(dim));
    return g;
}

std::vector<std::size_t> stratified_folds(const std::vector<int>& labels, std::size_t num_classes,
                                          std::size_t folds, std::uint64_t seed) {
    const std::size_t n = labels.size();
    std::vector<std::vector<std::size_t>> by_class(num_classes);
    for (std::size_t i = 0; i < n; ++i) {
        const int l = labels[i];
        if (l < 0 || static_cast<std::size_t>(l) >= num_classes)
            throw DataError("stratified_folds: label out of range");
        by_class[static_cast<std::size_t>(l)].push_back(i);
    }
    std::vector<std::size_t> fold(n);
    for (std::size_t c = 0; c < num_classes; ++c) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(c)};
        std::mt19937_64 rng(seq);
        auto idx = by_class[c];
        for (std::size_t i = idx.size(); i > 1; --i)
            std::swap(idx[i - 1], idx[rng() % i]);
        for (std::size_t pos = 0; pos < idx.size(); ++pos)
            fold[idx[pos]] = pos % folds;
    }
    return fold;
}

KernelParams tune(const Matrix& X, const std::vector<int>& labels,
                  const std::vector<std::string>& class_names, const TuneOptions& opts) {
    if (opts.folds < 2) throw ConfigError("tune: folds must be >= 2");
    const std::size_t C = class_names.size();
    const std::size_t n = X.rows();
    if (n != labels.size()) throw DataError("tune: label count mismatch");

    std::vector<std::size_t> per_class_count(C, 0);
    for (int l : labels) {
        if (l < 0 || static_cast<std::size_t>(l) >= C) throw DataError("tune: label out of range");
        ++per_class_count[static_cast<std::size_t>(l)];
    }
    for (std::size_t c = 0; c < C; ++c)
        if (per_class_count[c] < opts.folds)
            throw DataError("tune: class '" + class_names[c] + "' has " +
                            std::to_string(per_class_count[c]) + " samples, fewer than " +
                            std::to_string(opts.folds) + " folds");

    const std::vector<std::size_t> fold = stratified_folds(labels, C, opts.folds, opts.seed);

    std::vector<double> c_grid = opts.c_grid.empty() ? default_c_grid() : opts.c_grid;
    std::vector<double> gamma_grid =
        opts.gamma_grid.empty() ? default_gamma_grid(X.cols()) : opts.gamma_grid;
    std::sort(c_grid.begin(), c_grid.end());
    std::sort(gamma_grid.begin(), gamma_grid.end());

    KernelParams best;
    double best_score = -1.0;
    for (double c_val : c_grid) {
        for (double g_val : gamma_grid) {
            double mean_bacc = 0.0;
            for (std::size_t f = 0; f < opts.folds; ++f) {
                std::vector<std::size_t> tr, va;
                for (std::size_t i = 0; i < n; ++i)
                    (fold[i] == f ? va : tr).push_back(i);

                Matrix Xtr(tr.size(), X.cols());
                std::vector<int> ytr(tr.size());
                for (std::size_t i = 0; i < tr.size(); ++i) {
                    for (std::size_t col = 0; col < X.cols(); ++col)
                        Xtr(i, col) = X(tr[i], col);
                    ytr[i] = labels[tr[i]];
                }
                const OvaSvm model = train_ova(Xtr, ytr, class_names, {c_val, g_val});

                std::vector<int> truth(va.size()), pred(va.size());
                for (std::size_t i = 0; i < va.size(); ++i) {
                    const auto row = model.standardizer.apply(X.row(va[i]));
                    std::size_t best_c = 0;
                    double best_v = -std::numeric_limits<double>::infinity();
                    for (std::size_t cc = 0; cc < C; ++cc) {
                        const double v = decision_value(model.machines[cc], row);
                        if (v > best_v) {
                            best_v = v;
                            best_c = cc;
                        }
                    }
                    truth[i] = labels[va[i]];
                    pred[i] = static_cast<int>(best_c);
                }
                mean_bacc += balanced_accuracy(confusion(truth, pred, C));
            }
            mean_bacc /= static_cast<double>(opts.folds);
            if (mean_bacc > best_score) {  // strict: ties keep smaller C, then gamma
                best_score = mean_bacc;
                best = {c_val, g_val};
            }
        }
    }
    return best;
}

void save_ova(const std::filesystem::path& path, const OvaSvm& m) {
    std::ostringstream out;
    out << "# svm_model;classes=" << m.num_classes() << ";d=" << m.dim() << "\n";
    out << "classes";
    for (const auto& name : m.class_names) out << ',' << name;
    out << '\n';
    out << "std_mean";
    for (double v : m.standardizer.mean) out << ',' << csv::format_double(v);
    out << '\n';
    out << "std_scale";
    for (double v : m.standardizer.scale) out << ',' << csv::format_double(v);
    out << '\n';
    for (std::size_t c = 0; c < m.num_classes(); ++c) {
        const BinarySvm& b = m.machines[c];
        out << "machine," << c << ',' << b.support_vectors.rows() << ','
            << csv::format_double(b.bias) << ',' << csv::format_double(b.params.C) << ','
            << csv::format_double(b.params.gamma) << '\n';
        for (std::size_t s = 0; s < b.support_vectors.rows(); ++s) {
            out << "sv," << csv::format_double(b.dual_coef[s]);
            for (std::size_t col = 0; col < b.support_vectors.cols(); ++col)
                out << ',' << csv::format_double(b.support_vectors(s, col));
            out << '\n';
        }
    }
    csv::write_file_atomic(path, out.str());
}

OvaSvm load_ova(const std::filesystem::path& path) {
    const auto lines = csv::read_lines(path);
    OvaSvm m;
    std::size_t d = 0;
    BinarySvm* current = nullptr;
    std::vector<std::vector<double>> sv_rows;
    std::vector<double> coefs;

    const auto flush_machine = [&]() {
        if (!current) return;
        current->support_vectors = Matrix(sv_rows.size(), d);
        current->dual_coef = coefs;
        for (std::size_t r = 0; r < sv_rows.size(); ++r)
            for (std::size_t c = 0; c < d; ++c) current->support_vectors(r, c) = sv_rows[r][c];
        sv_rows.clear();
        coefs.clear();
    };

    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::string& line = lines[i];
        if (line.empty() || line.starts_with("#")) continue;
        const auto f = csv::split(line);
        const std::string ctx = path.string() + " line " + std::to_string(i + 1);
        if (f[0] == "classes") {
            m.class_names.assign(f.begin() + 1, f.end());
        } else if (f[0] == "std_mean" || f[0] == "std_scale") {
            std::vector<double> vals;
            for (std::size_t j = 1; j < f.size(); ++j) vals.push_back(csv::parse_double(f[j], ctx));
            d = vals.size();
            (f[0] == "std_mean" ? m.standardizer.mean : m.standardizer.scale) = std::move(vals);
        } else if (f[0] == "machine") {
            flush_machine();
            m.machines.emplace_back();
            current = &m.machines.back();
            current->bias = csv::parse_double(f[3], ctx);
            current->params.C = csv::parse_double(f[4], ctx);
            current->params.gamma = csv::parse_double(f[5], ctx);
        } else if (f[0] == "sv") {
            if (!current) throw DataError(ctx + ": sv row before machine row");
            coefs.push_back(csv::parse_double(f[1], ctx));
            std::vector<double> row;
            for (std::size_t j = 2; j < f.size(); ++j) row.push_back(csv::parse_double(f[j], ctx));
            if (row.size() != d) throw DataError(ctx + ": support vector width mismatch");
            sv_rows.push_back(std::move(row));
        } else {
            throw DataError(ctx + ": unknown row label '" + f[0] + "'");
        }
    }
    flush_machine();
    if (m.machines.size() != m.class_names.size())
        throw DataError(path.string() + ": machine count does not match class list");
    return m;
}

}  // namespace lesionfuse
