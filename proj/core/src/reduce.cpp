#include "lesionfuse/reduce.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <sstream>

#include <Eigen/Dense>
#include <fftw3.h>

#include "csv.hpp"
#include "lesionfuse/errors.hpp"

namespace lesionfuse {

namespace {

void fix_sign(Eigen::VectorXd& v) {
    int max_idx = 0;
    for (int i = 1; i < v.size(); ++i)
        if (std::abs(v(i)) > std::abs(v(max_idx))) max_idx = i;
    if (v(max_idx) < 0) v = -v;
}

std::mutex fftw_plan_mutex;  // FFTW planning is not thread-safe

}  // namespace

PcaModel pca_fit(const FeatureMatrix& train, std::size_t target_k) {
    const std::size_t n = train.n();
    const std::size_t d = train.dim();
    if (n < 2) throw DataError("pca_fit: need at least 2 training rows");
    const std::size_t k = std::min({target_k, d, n - 1});
    if (k == 0) throw ConfigError("pca_fit: target_k must be >= 1");

    Eigen::MatrixXd x(n, d);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < d; ++c) x(r, c) = train.data(r, c);

    const Eigen::RowVectorXd mean = x.colwise().mean();
    const Eigen::MatrixXd centered = x.rowwise() - mean;

    PcaModel model;
    model.mean.assign(mean.data(), mean.data() + d);
    model.components = Matrix(k, d);
    model.explained_variance.resize(k);

    if (n >= d) {
        const Eigen::MatrixXd cov =
            centered.transpose() * centered / static_cast<double>(n - 1);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
        if (solver.info() != Eigen::Success) throw std::runtime_error("pca_fit: eigensolver failed");
        for (std::size_t i = 0; i < k; ++i) {
            const auto src = static_cast<Eigen::Index>(d - 1 - i);  // ascending -> descending
            Eigen::VectorXd v = solver.eigenvectors().col(src);
            fix_sign(v);
            for (std::size_t c = 0; c < d; ++c) model.components(i, c) = v(c);
            model.explained_variance[i] = std::max(0.0, solver.eigenvalues()(src));
        }
    } else {
        // Gram route: eigenvectors of the n x n matrix lift to components.
        const Eigen::MatrixXd gram =
            centered * centered.transpose() / static_cast<double>(n - 1);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
        if (solver.info() != Eigen::Success) throw std::runtime_error("pca_fit: eigensolver failed");
        for (std::size_t i = 0; i < k; ++i) {
            const auto src = static_cast<Eigen::Index>(n - 1 - i);
            const double lambda = solver.eigenvalues()(src);
            Eigen::VectorXd v = centered.transpose() * solver.eigenvectors().col(src);
            const double norm = v.norm();
            if (norm > 0) v /= norm;
            fix_sign(v);
            for (std::size_t c = 0; c < d; ++c) model.components(i, c) = v(c);
            model.explained_variance[i] = std::max(0.0, lambda);
        }
    }
    return model;
}

FeatureMatrix pca_project(const PcaModel& m, const FeatureMatrix& x) {
    if (x.dim() != m.d())
        throw DataError("pca_project: feature dim " + std::to_string(x.dim()) +
                        " does not match model dim " + std::to_string(m.d()));
    FeatureMatrix out;
    out.descriptor_id = x.descriptor_id;
    out.ids = x.ids;
    out.data = Matrix(x.n(), m.k());
    for (std::size_t r = 0; r < x.n(); ++r) {
        for (std::size_t i = 0; i < m.k(); ++i) {
            double acc = 0.0;
            for (std::size_t c = 0; c < m.d(); ++c)
                acc += (x.data(r, c) - m.mean[c]) * m.components(i, c);
            out.data(r, i) = acc;
        }
    }
    return out;
}

FeatureMatrix pca_reconstruct(const PcaModel& m, const FeatureMatrix& projected) {
    if (projected.dim() != m.k())
        throw DataError("pca_reconstruct: input dim does not match model k");
    FeatureMatrix out;
    out.descriptor_id = projected.descriptor_id;
    out.ids = projected.ids;
    out.data = Matrix(projected.n(), m.d());
    for (std::size_t r = 0; r < projected.n(); ++r) {
        for (std::size_t c = 0; c < m.d(); ++c) {
            double acc = m.mean[c];
            for (std::size_t i = 0; i < m.k(); ++i)
                acc += projected.data(r, i) * m.components(i, c);
            out.data(r, c) = acc;
        }
    }
    return out;
}

void save_pca(const std::filesystem::path& path, const PcaModel& m) {
    std::ostringstream out;
    out << "# pca;d=" << m.d() << ";k=" << m.k() << "\n";
    out << "mean";
    for (double v : m.mean) out << ',' << csv::format_double(v);
    out << '\n';
    for (std::size_t i = 0; i < m.k(); ++i) {
        out << "comp";
        for (std::size_t c = 0; c < m.d(); ++c)
            out << ',' << csv::format_double(m.components(i, c));
        out << '\n';
    }
    csv::write_file_atomic(path, out.str());
}

PcaModel load_pca(const std::filesystem::path& path) {
    const auto lines = csv::read_lines(path);
    std::size_t i = 0;
    while (i < lines.size() && lines[i].starts_with("#")) ++i;
    PcaModel m;
    std::vector<std::vector<double>> comps;
    for (; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        const auto f = csv::split(lines[i]);
        std::vector<double> row;
        row.reserve(f.size() - 1);
        for (std::size_t j = 1; j < f.size(); ++j)
            row.push_back(csv::parse_double(f[j], path.string()));
        if (f[0] == "mean") m.mean = std::move(row);
        else if (f[0] == "comp") comps.push_back(std::move(row));
        else throw DataError(path.string() + ": unexpected row label '" + f[0] + "'");
    }
    if (m.mean.empty() || comps.empty())
        throw DataError(path.string() + ": incomplete model");
    m.components = Matrix(comps.size(), m.mean.size());
    m.explained_variance.assign(comps.size(), 0.0);
    for (std::size_t r = 0; r < comps.size(); ++r) {
        if (comps[r].size() != m.mean.size())
            throw DataError(path.string() + ": component row width mismatch");
        for (std::size_t c = 0; c < m.mean.size(); ++c) m.components(r, c) = comps[r][c];
    }
    return m;
}

std::vector<double> dct_reduce(const std::vector<double>& x, std::size_t target_k) {
    const std::size_t d = x.size();
    if (d == 0) throw DataError("dct_reduce: empty vector");
    const std::size_t keep = std::min(target_k, d);

    std::vector<double> in(x);
    std::vector<double> raw(d);
    {
        std::lock_guard lock(fftw_plan_mutex);
        fftw_plan plan = fftw_plan_r2r_1d(static_cast<int>(d), in.data(), raw.data(),
                                          FFTW_REDFT10, FFTW_ESTIMATE);
        fftw_execute(plan);
        fftw_destroy_plan(plan);
    }
    // REDFT10 gives 2 * sum x_n cos(pi (n + 1/2) k / d); rescale to the
    // orthonormal DCT-II.
    const double s0 = 1.0 / (2.0 * std::sqrt(static_cast<double>(d)));
    const double sk = 1.0 / std::sqrt(2.0 * static_cast<double>(d));
    std::vector<double> out(keep);
    for (std::size_t k = 0; k < keep; ++k) out[k] = raw[k] * (k == 0 ? s0 : sk);
    return out;
}

FeatureVector dct_reduce(const FeatureVector& x, std::size_t target_k) {
    return {x.descriptor_id, dct_reduce(x.values, target_k)};
}

std::vector<double> dct_inverse(const std::vector<double>& coeffs, std::size_t original_dim) {
    if (original_dim == 0 || coeffs.empty() || coeffs.size() > original_dim)
        throw DataError("dct_inverse: invalid dimensions");
    const std::size_t d = original_dim;
    // Undo the orthonormal scaling, zero-pad, then REDFT01 (which computes
    // x_n = in_0 + 2 sum_{k>=1} in_k cos(pi k (n + 1/2) / d)).
    std::vector<double> in(d, 0.0);
    const double s0 = 1.0 / std::sqrt(static_cast<double>(d));
    const double sk = std::sqrt(2.0 / static_cast<double>(d));
    for (std::size_t k = 0; k < coeffs.size(); ++k)
        in[k] = coeffs[k] * (k == 0 ? s0 : sk / 2.0);
    std::vector<double> out(d);
    {
        std::lock_guard lock(fftw_plan_mutex);
        fftw_plan plan = fftw_plan_r2r_1d(static_cast<int>(d), in.data(), out.data(),
                                          FFTW_REDFT01, FFTW_ESTIMATE);
        fftw_execute(plan);
        fftw_destroy_plan(plan);
    }
    return out;
}

}  // namespace lesionfuse
