#include "lesionfuse/scores.hpp"

#include <cmath>
#include <sstream>

#include "csv.hpp"
#include "lesionfuse/errors.hpp"

namespace lesionfuse {

std::vector<int> predictions(const ScoreMatrix& s) {
    std::vector<int> out(s.scores.rows());
    for (std::size_t r = 0; r < s.scores.rows(); ++r) {
        std::size_t best = 0;
        for (std::size_t c = 1; c < s.scores.cols(); ++c)
            if (s.scores(r, c) > s.scores(r, best)) best = c;
        out[r] = static_cast<int>(best);
    }
    return out;
}

void write_scores(const std::filesystem::path& path, const ScoreMatrix& s) {
    std::ostringstream out;
    out << "# member_id=" << s.member_id << "\n";
    out << "id";
    for (const auto& name : s.class_names) out << ',' << name;
    out << '\n';
    for (std::size_t r = 0; r < s.n(); ++r) {
        out << s.ids[r];
        for (std::size_t c = 0; c < s.num_classes(); ++c)
            out << ',' << csv::format_double(s.scores(r, c));
        out << '\n';
    }
    csv::write_file_atomic(path, out.str());
}

ScoreMatrix read_scores(const std::filesystem::path& path) {
    const auto lines = csv::read_lines(path);
    ScoreMatrix s;
    std::size_t i = 0;
    for (; i < lines.size() && lines[i].starts_with("#"); ++i) {
        const std::string& line = lines[i];
        const auto pos = line.find("member_id=");
        if (pos != std::string::npos) s.member_id = line.substr(pos + 10);
    }
    if (i >= lines.size()) throw DataError(path.string() + ": missing header row");
    auto header = csv::split(lines[i]);
    if (header.size() < 2 || header[0] != "id")
        throw DataError(path.string() + ": header must be 'id,<class names...>'");
    s.class_names.assign(header.begin() + 1, header.end());
    ++i;

    const std::size_t C = s.class_names.size();
    std::vector<double> values;
    for (; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        const auto fields = csv::split(lines[i]);
        if (fields.size() != C + 1)
            throw DataError(path.string() + ": row " + std::to_string(i + 1) + " has " +
                            std::to_string(fields.size() - 1) + " scores, expected " +
                            std::to_string(C));
        s.ids.push_back(fields[0]);
        for (std::size_t c = 0; c < C; ++c) {
            const double v = csv::parse_double(
                fields[c + 1], path.string() + " row " + std::to_string(i + 1));
            if (!std::isfinite(v))
                throw DataError(path.string() + ": non-finite score at row " +
                                std::to_string(i + 1) + ", column '" + s.class_names[c] + "'");
            values.push_back(v);
        }
    }
    s.scores = Matrix(s.ids.size(), C);
    s.scores.data() = std::move(values);
    return s;
}

}  // namespace lesionfuse
