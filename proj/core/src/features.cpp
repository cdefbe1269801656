#include "lesionfuse/features.hpp"

#include <cmath>
#include <sstream>

#include "csv.hpp"
#include "lesionfuse/errors.hpp"

namespace lesionfuse {

void write_features(const std::filesystem::path& path, const FeatureMatrix& m) {
    std::ostringstream out;
    out << "# descriptor_id=" << m.descriptor_id << ";dim=" << m.dim() << "\n";
    out << "id";
    for (std::size_t j = 0; j < m.dim(); ++j) out << ",v" << j;
    out << '\n';
    for (std::size_t r = 0; r < m.n(); ++r) {
        out << m.ids[r];
        for (std::size_t j = 0; j < m.dim(); ++j)
            out << ',' << csv::format_double(m.data(r, j));
        out << '\n';
    }
    csv::write_file_atomic(path, out.str());
}

FeatureMatrix read_features(const std::filesystem::path& path) {
    const auto lines = csv::read_lines(path);
    FeatureMatrix m;
    std::size_t dim_declared = 0;
    std::size_t i = 0;
    for (; i < lines.size() && lines[i].starts_with("#"); ++i) {
        const std::string& line = lines[i];
        if (auto pos = line.find("descriptor_id="); pos != std::string::npos) {
            const auto end = line.find(';', pos);
            m.descriptor_id = line.substr(pos + 14, end == std::string::npos
                                                        ? std::string::npos
                                                        : end - pos - 14);
        }
        if (auto pos = line.find("dim="); pos != std::string::npos)
            dim_declared = static_cast<std::size_t>(
                std::stoul(line.substr(pos + 4)));
    }
    if (i >= lines.size()) throw DataError(path.string() + ": missing header row");
    const auto header = csv::split(lines[i]);
    if (header.empty() || header[0] != "id")
        throw DataError(path.string() + ": header must start with 'id'");
    const std::size_t d = header.size() - 1;
    if (dim_declared != 0 && dim_declared != d)
        throw DataError(path.string() + ": declared dim " + std::to_string(dim_declared) +
                        " does not match header width " + std::to_string(d));
    ++i;

    std::vector<double> values;
    for (; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        const auto f = csv::split(lines[i]);
        if (f.size() != d + 1)
            throw DataError(path.string() + ": row " + std::to_string(i + 1) +
                            " has wrong field count");
        m.ids.push_back(f[0]);
        for (std::size_t j = 0; j < d; ++j) {
            const double v =
                csv::parse_double(f[j + 1], path.string() + " row " + std::to_string(i + 1));
            if (!std::isfinite(v))
                throw DataError(path.string() + ": non-finite value at row " +
                                std::to_string(i + 1) + ", column v" + std::to_string(j));
            values.push_back(v);
        }
    }
    m.data = Matrix(m.ids.size(), d);
    m.data.data() = std::move(values);
    return m;
}

}  // namespace lesionfuse
