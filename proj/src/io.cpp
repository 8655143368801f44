#include "hypatk/io.hpp"

#include "hypatk/error.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace hypatk::io {

namespace {

using json = nlohmann::json;

[[noreturn]] void bad(std::string_view source, std::size_t line, const std::string& what) {
    throw DataError(std::string(source) + ":" + std::to_string(line) + ": " + what);
}

std::string join_header(const std::vector<std::string>& cols) {
    std::string s;
    for (std::size_t i = 0; i < cols.size(); ++i) {
        if (i) s += ',';
        s += cols[i];
    }
    return s + '\n';
}

const std::vector<std::string> kHistoryHeader = {"epoch", "mean_ce", "train_accuracy"};
const std::vector<std::string> kRecordsHeader = {"sample_id", "true_label", "clean_pred", "adv_pred",
                                                 "attack", "objective", "epsilon", "achieved_distance",
                                                 "zero_gradient", "clean_incorrect"};
const std::vector<std::string> kSweepHeader = {"attack", "objective", "epsilon", "n_samples", "n_correct",
                                               "accuracy"};

bool parse_flag(std::string_view f, std::string_view source, std::size_t line) {
    if (f == "0") return false;
    if (f == "1") return true;
    bad(source, line, "expected 0 or 1, got '" + std::string(f) + "'");
}

std::size_t parse_count(std::string_view f, std::string_view source, std::size_t line) {
    const long long v = parse_int(f, source, line);
    if (v < 0) bad(source, line, "negative count");
    return static_cast<std::size_t>(v);
}

std::vector<std::string> label_columns(int C) {
    std::vector<std::string> cols;
    for (int k = 0; k < C; ++k) cols.push_back(std::to_string(k));
    return cols;
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw DataError("read failed: " + path.string());
    return ss.str();
}

void write_text(const fs::path& path, std::string_view text) {
    std::error_code ec;
    if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
    if (ec) throw DataError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    out.close();
    if (!out) throw DataError("write failed: " + path.string());
}

CsvTable parse_csv(std::string_view text, std::string_view source) {
    CsvTable table;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) bad(source, line_no, "empty line");
        std::vector<std::string> fields;
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = line.find(',', start);
            fields.emplace_back(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start));
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
        if (line_no == 1) {
            table.header = std::move(fields);
        } else {
            if (fields.size() != table.header.size()) {
                bad(source, line_no,
                    "expected " + std::to_string(table.header.size()) + " fields, got " + std::to_string(fields.size()));
            }
            table.rows.push_back(std::move(fields));
        }
    }
    if (line_no == 0) bad(source, 1, "missing header");
    return table;
}

void expect_header(const CsvTable& table, const std::vector<std::string>& header, std::string_view source) {
    if (table.header == header) return;
    std::string want = join_header(header);
    want.pop_back();
    bad(source, 1, "unexpected header, want '" + want + "'");
}

double parse_double(std::string_view f, std::string_view source, std::size_t line) {
    double v = 0.0;
    const auto res = std::from_chars(f.data(), f.data() + f.size(), v);
    if (res.ec != std::errc() || res.ptr != f.data() + f.size() || !std::isfinite(v)) {
        bad(source, line, "invalid number '" + std::string(f) + "'");
    }
    return v;
}

long long parse_int(std::string_view f, std::string_view source, std::size_t line) {
    long long v = 0;
    const auto res = std::from_chars(f.data(), f.data() + f.size(), v);
    if (res.ec != std::errc() || res.ptr != f.data() + f.size()) {
        bad(source, line, "invalid integer '" + std::string(f) + "'");
    }
    return v;
}

// ---------------------------------------------------------------------------

std::string dataset_csv(const sampling::LabeledDataset& data) {
    const auto dim = static_cast<std::size_t>(data.dim());
    std::vector<std::string> header;
    for (std::size_t d = 0; d < dim; ++d) header.push_back("x" + std::to_string(d));
    header.emplace_back("label");
    std::string out = join_header(header);
    for (std::size_t i = 0; i < data.size(); ++i) {
        for (std::size_t d = 0; d < dim; ++d) {
            out += format_double(data.points[i][static_cast<Eigen::Index>(d)]);
            out += ',';
        }
        out += std::to_string(data.labels[i]);
        out += '\n';
    }
    return out;
}

sampling::LabeledDataset parse_dataset_csv(std::string_view text, std::string_view source, geometry::Curvature c,
                                           sampling::Split split) {
    const CsvTable table = parse_csv(text, source);
    if (table.header.size() < 2 || table.header.back() != "label") bad(source, 1, "dataset header must end in label");
    const std::size_t dim = table.header.size() - 1;
    for (std::size_t d = 0; d < dim; ++d) {
        if (table.header[d] != "x" + std::to_string(d)) bad(source, 1, "bad coordinate column " + table.header[d]);
    }
    sampling::LabeledDataset data;
    data.split = split;
    const double rmax = c.max_radius();
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const std::size_t line = r + 2;
        Eigen::VectorXd x(static_cast<Eigen::Index>(dim));
        for (std::size_t d = 0; d < dim; ++d) x[static_cast<Eigen::Index>(d)] = parse_double(table.rows[r][d], source, line);
        if (x.norm() > rmax) bad(source, line, "point outside the ball");
        const long long label = parse_int(table.rows[r][dim], source, line);
        if (label < 0) bad(source, line, "negative label");
        data.points.emplace_back(x);
        data.labels.push_back(static_cast<int>(label));
    }
    return data;
}

std::string model_json(const model::MlrParams& params) {
    // Hand-written so that every number carries 17 significant digits.
    auto rows = [&](auto&& get) {
        std::string out = "[";
        for (int k = 0; k < params.num_classes(); ++k) {
            const Eigen::VectorXd v = get(static_cast<std::size_t>(k));
            out += k ? ",\n    [" : "\n    [";
            for (Eigen::Index d = 0; d < v.size(); ++d) out += (d ? ", " : "") + format_double(v[d]);
            out += ']';
        }
        return out + "\n  ]";
    };
    std::string out = "{\n";
    out += "  \"curvature\": " + format_double(params.curvature.value()) + ",\n";
    out += "  \"dim\": " + std::to_string(params.dim()) + ",\n";
    out += "  \"num_classes\": " + std::to_string(params.num_classes()) + ",\n";
    out += "  \"p\": " + rows([&](std::size_t k) { return params.p[k].coords(); }) + ",\n";
    out += "  \"a\": " + rows([&](std::size_t k) { return params.a[k]; }) + "\n}\n";
    return out;
}

model::MlrParams parse_model_json(std::string_view text, std::string_view source) {
    try {
        const json j = json::parse(text);
        model::MlrParams params;
        params.curvature = geometry::Curvature(j.at("curvature").get<double>());
        const int C = j.at("num_classes").get<int>();
        const int dim = j.at("dim").get<int>();
        const auto& p = j.at("p");
        const auto& a = j.at("a");
        if (C < 1 || dim < 1 || static_cast<int>(p.size()) != C || static_cast<int>(a.size()) != C) {
            throw DataError(std::string(source) + ": inconsistent model shape");
        }
        for (int k = 0; k < C; ++k) {
            const auto pk = p.at(k).get<std::vector<double>>();
            const auto ak = a.at(k).get<std::vector<double>>();
            if (static_cast<int>(pk.size()) != dim || static_cast<int>(ak.size()) != dim) {
                throw DataError(std::string(source) + ": class " + std::to_string(k) + " has wrong dimension");
            }
            params.p.emplace_back(Eigen::Map<const Eigen::VectorXd>(pk.data(), dim));
            params.a.emplace_back(Eigen::Map<const Eigen::VectorXd>(ak.data(), dim));
        }
        params.validate();
        return params;
    } catch (const json::exception& e) {
        throw DataError(std::string(source) + ": " + e.what());
    } catch (const ConfigError& e) {
        throw DataError(std::string(source) + ": " + e.what());
    }
}

std::string history_csv(const std::vector<model::EpochStats>& history) {
    std::string out = join_header(kHistoryHeader);
    for (const auto& h : history) {
        out += std::to_string(h.epoch) + ',' + format_double(h.mean_ce) + ',' + format_double(h.train_accuracy) + '\n';
    }
    return out;
}

std::vector<model::EpochStats> parse_history_csv(std::string_view text, std::string_view source) {
    const CsvTable table = parse_csv(text, source);
    expect_header(table, kHistoryHeader, source);
    std::vector<model::EpochStats> out;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        model::EpochStats s;
        s.epoch = static_cast<int>(parse_int(row[0], source, r + 2));
        s.mean_ce = parse_double(row[1], source, r + 2);
        s.train_accuracy = parse_double(row[2], source, r + 2);
        if (s.train_accuracy < 0.0 || s.train_accuracy > 1.0) bad(source, r + 2, "accuracy outside [0, 1]");
        out.push_back(s);
    }
    return out;
}

std::string records_csv(const std::vector<attacks::PredictionRecord>& records) {
    std::string out = join_header(kRecordsHeader);
    for (const auto& r : records) {
        out += std::to_string(r.sample_id) + ',' + std::to_string(r.true_label) + ',' + std::to_string(r.clean_pred) +
               ',' + std::to_string(r.adv_pred) + ',' + std::string(attacks::family_name(r.family)) + ',' +
               std::string(model::objective_name(r.objective)) + ',' + format_double(r.epsilon) + ',' +
               format_double(r.achieved_distance) + ',' + (r.zero_gradient ? '1' : '0') + ',' +
               (r.clean_incorrect ? '1' : '0') + '\n';
    }
    return out;
}

std::vector<attacks::PredictionRecord> parse_records_csv(std::string_view text, std::string_view source) {
    const CsvTable table = parse_csv(text, source);
    expect_header(table, kRecordsHeader, source);
    std::vector<attacks::PredictionRecord> out;
    out.reserve(table.rows.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const std::size_t line = r + 2;
        attacks::PredictionRecord rec;
        rec.sample_id = parse_count(row[0], source, line);
        rec.true_label = static_cast<int>(parse_count(row[1], source, line));
        rec.clean_pred = static_cast<int>(parse_count(row[2], source, line));
        rec.adv_pred = static_cast<int>(parse_count(row[3], source, line));
        const auto fam = attacks::parse_family(row[4]);
        if (!fam) bad(source, line, "unknown attack '" + row[4] + "'");
        rec.family = *fam;
        const auto obj = model::parse_objective(row[5]);
        if (!obj) bad(source, line, "unknown objective '" + row[5] + "'");
        rec.objective = *obj;
        rec.epsilon = parse_double(row[6], source, line);
        rec.achieved_distance = parse_double(row[7], source, line);
        rec.zero_gradient = parse_flag(row[8], source, line);
        rec.clean_incorrect = parse_flag(row[9], source, line);
        if (rec.epsilon <= 0.0 || rec.achieved_distance < 0.0) bad(source, line, "invalid distance fields");
        if (rec.clean_incorrect != (rec.clean_pred != rec.true_label)) bad(source, line, "clean_incorrect mismatch");
        out.push_back(rec);
    }
    return out;
}

std::string sweep_csv(const analysis::SweepResult& sweep) {
    std::string out = join_header(kSweepHeader);
    for (const auto& r : sweep.rows) {
        out += std::string(attacks::family_name(r.family)) + ',' + std::string(model::objective_name(r.objective)) +
               ',' + format_double(r.epsilon) + ',' + std::to_string(r.n_samples) + ',' +
               std::to_string(r.n_correct) + ',' + format_double(r.accuracy) + '\n';
    }
    return out;
}

analysis::SweepResult parse_sweep_csv(std::string_view text, std::string_view source) {
    const CsvTable table = parse_csv(text, source);
    expect_header(table, kSweepHeader, source);
    analysis::SweepResult out;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const std::size_t line = r + 2;
        analysis::SweepRow s;
        const auto fam = attacks::parse_family(row[0]);
        const auto obj = model::parse_objective(row[1]);
        if (!fam || !obj) bad(source, line, "unknown attack or objective");
        s.family = *fam;
        s.objective = *obj;
        s.epsilon = parse_double(row[2], source, line);
        s.n_samples = parse_count(row[3], source, line);
        s.n_correct = parse_count(row[4], source, line);
        s.accuracy = parse_double(row[5], source, line);
        if (s.n_correct > s.n_samples || s.accuracy < 0.0 || s.accuracy > 1.0) bad(source, line, "invalid counts");
        out.rows.push_back(s);
    }
    return out;
}

std::string matrix_csv(const analysis::MisclassMatrix& m) {
    const int C = m.num_classes();
    std::vector<std::string> header = label_columns(C);
    header.emplace_back("row_count");
    std::string out = join_header(header);
    for (int i = 0; i < C; ++i) {
        for (int j = 0; j < C; ++j) out += format_double(m.values(i, j)) + ',';
        out += std::to_string(m.row_counts[static_cast<std::size_t>(i)]) + '\n';
    }
    return out;
}

analysis::MisclassMatrix parse_matrix_csv(std::string_view text, std::string_view source) {
    const CsvTable table = parse_csv(text, source);
    const int C = static_cast<int>(table.header.size()) - 1;
    std::vector<std::string> header = label_columns(std::max(C, 0));
    header.emplace_back("row_count");
    expect_header(table, header, source);
    if (static_cast<int>(table.rows.size()) != C) bad(source, 1, "matrix must have one row per class");
    analysis::MisclassMatrix m{Eigen::MatrixXd::Zero(C, C), std::vector<std::size_t>(static_cast<std::size_t>(C))};
    for (int i = 0; i < C; ++i) {
        const auto& row = table.rows[static_cast<std::size_t>(i)];
        for (int j = 0; j < C; ++j) m.values(i, j) = parse_double(row[static_cast<std::size_t>(j)], source, i + 2);
        m.row_counts[static_cast<std::size_t>(i)] = parse_count(row[static_cast<std::size_t>(C)], source, i + 2);
    }
    return m;
}

std::string comparative_csv(const Eigen::MatrixXd& m) {
    const int C = static_cast<int>(m.rows());
    std::string out = join_header(label_columns(C));
    for (int i = 0; i < C; ++i) {
        for (int j = 0; j < C; ++j) {
            if (j) out += ',';
            out += format_double(m(i, j));
        }
        out += '\n';
    }
    return out;
}

}  // namespace hypatk::io
