#include "siren/score_store.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "siren/error.hpp"

namespace siren {

std::string_view to_string(ViolationKind kind) noexcept {
    switch (kind) {
        case ViolationKind::EmptyShortlist: return "EmptyShortlist";
        case ViolationKind::InconsistentItems: return "InconsistentItems";
        case ViolationKind::OutOfRangeScore: return "OutOfRangeScore";
        case ViolationKind::ArtifactCountMismatch: return "ArtifactCountMismatch";
        case ViolationKind::DuplicateBudget: return "DuplicateBudget";
        case ViolationKind::UnknownBudget: return "UnknownBudget";
        case ViolationKind::DuplicateCell: return "DuplicateCell";
        case ViolationKind::DuplicateItem: return "DuplicateItem";
        case ViolationKind::EmptyItemSet: return "EmptyItemSet";
    }
    return "Unknown";
}

std::optional<std::size_t> ScoreTensor::find(const CellRef& ref) const noexcept {
    for (std::size_t c = 0; c < cells.size(); ++c) {
        if (cells[c].system == ref.system && cells[c].budget == ref.budget) return c;
    }
    return std::nullopt;
}

std::size_t ScoreTensor::index_of(const CellRef& ref) const {
    if (auto c = find(ref)) return *c;
    throw Error(ErrorCode::UnknownCell, "no cell " + ref.label());
}

bool natural_less(std::string_view a, std::string_view b) noexcept {
    auto is_digit = [](char c) { return c >= '0' && c <= '9'; };
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (is_digit(a[i]) && is_digit(b[j])) {
            std::size_t ie = i, je = j;
            while (ie < a.size() && is_digit(a[ie])) ++ie;
            while (je < b.size() && is_digit(b[je])) ++je;
            std::size_t is = i, js = j;
            while (is + 1 < ie && a[is] == '0') ++is;
            while (js + 1 < je && b[js] == '0') ++js;
            const std::size_t la = ie - is, lb = je - js;
            if (la != lb) return la < lb;
            const int cmp = a.substr(is, la).compare(b.substr(js, lb));
            if (cmp != 0) return cmp < 0;
            i = ie;
            j = je;
        } else {
            if (a[i] != b[j]) return static_cast<unsigned char>(a[i]) < static_cast<unsigned char>(b[j]);
            ++i;
            ++j;
        }
    }
    if (a.size() - i != b.size() - j) return a.size() - i < b.size() - j;
    return a < b;  // tie-break zero-padding differences
}

// ---------------------------------------------------------------------------
// Validation

std::vector<Violation> validate(const ScoreTensor& t) {
    std::vector<Violation> out;
    const std::size_t M = t.item_count();
    if (M == 0) out.push_back({ViolationKind::EmptyItemSet, "", "", "", "tensor has no items"});

    std::unordered_set<std::string> seen_items;
    for (const auto& item : t.items) {
        if (!seen_items.insert(item).second)
            out.push_back({ViolationKind::DuplicateItem, "", item, "", "item listed twice"});
    }
    std::unordered_set<std::string> grid;
    for (const auto& b : t.budget_grid) {
        if (!grid.insert(b).second)
            out.push_back({ViolationKind::DuplicateBudget, "", "", "", "budget " + b + " listed twice"});
    }

    std::set<std::pair<std::string, std::string>> seen_cells;
    for (const auto& cell : t.cells) {
        const std::string label = cell.ref().label();
        if (!grid.contains(cell.budget))
            out.push_back({ViolationKind::UnknownBudget, label, "", "", "budget not in grid"});
        if (!seen_cells.insert({cell.system, cell.budget}).second)
            out.push_back({ViolationKind::DuplicateCell, label, "", "", "cell listed twice"});
        const std::size_t K = cell.shortlist_size();
        if (K == 0) out.push_back({ViolationKind::EmptyShortlist, label, "", "", "shortlist is empty"});

        auto check_matrix = [&](const ScoreMatrix& z, std::string_view role) {
            if (z.cols() != K) {
                out.push_back({ViolationKind::ArtifactCountMismatch, label, "", "",
                               std::string(role) + " matrix has " + std::to_string(z.cols()) +
                                   " columns for " + std::to_string(K) + " artifacts"});
                return;
            }
            if (z.rows() != M) {
                out.push_back({ViolationKind::InconsistentItems, label, "", "",
                               std::string(role) + " matrix has " + std::to_string(z.rows()) +
                                   " rows for " + std::to_string(M) + " items"});
                return;
            }
            for (std::size_t k = 0; k < K; ++k) {
                for (std::size_t i = 0; i < M; ++i) {
                    const double v = z(i, k);
                    if (!(v >= 0.0 && v <= 1.0)) {
                        out.push_back({ViolationKind::OutOfRangeScore, label, t.items[i], cell.artifacts[k],
                                       std::string(role) + " score outside [0, 1]"});
                    }
                }
            }
        };
        check_matrix(cell.scores, "score");
        if (cell.eval_scores) check_matrix(*cell.eval_scores, "eval");
    }
    return out;
}

void require_valid(const ScoreTensor& tensor) {
    const auto violations = validate(tensor);
    if (violations.empty()) return;
    const Violation& v = violations.front();
    ErrorCode code = ErrorCode::InvalidArgument;
    switch (v.kind) {
        case ViolationKind::InconsistentItems: code = ErrorCode::InconsistentItems; break;
        case ViolationKind::OutOfRangeScore: code = ErrorCode::OutOfRangeScore; break;
        case ViolationKind::DuplicateBudget:
        case ViolationKind::DuplicateCell:
        case ViolationKind::DuplicateItem: code = ErrorCode::DuplicateEntry; break;
        default: break;
    }
    std::string where = v.cell;
    if (!v.item.empty()) where += " item " + v.item;
    if (!v.artifact.empty()) where += " artifact " + v.artifact;
    throw Error(code, std::string(to_string(v.kind)) + (where.empty() ? "" : " at " + where) + ": " + v.message);
}

// ---------------------------------------------------------------------------
// Long CSV

namespace {

std::vector<std::string> split_csv_line(const std::string& line, std::size_t line_no) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (quoted) throw Error(ErrorCode::ParseError, "unterminated quote on line " + std::to_string(line_no));
    fields.push_back(std::move(cur));
    return fields;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse_score(std::string_view text, std::size_t line_no) {
    while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
    while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
    double v = 0.0;
    auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size())
        throw Error(ErrorCode::ParseError, "bad score '" + std::string(text) + "' on line " + std::to_string(line_no));
    if (!(v >= 0.0 && v <= 1.0))
        throw Error(ErrorCode::OutOfRangeScore,
                    "score " + std::string(text) + " outside [0, 1] on line " + std::to_string(line_no));
    return v;
}

enum class Role { Both, Score, Eval };

struct Entry {
    std::optional<double> score;
    std::optional<double> eval;
    bool role_specific = false;
};

struct CellBuild {
    std::vector<std::string> artifacts;
    std::unordered_set<std::string> artifact_set;
    std::unordered_set<std::string> item_set;
    std::map<std::pair<std::string, std::string>, Entry> entries;  // (item, artifact)
    bool role_specific = false;
};

template <typename Range>
std::vector<std::string> naturally_sorted(const Range& r) {
    std::vector<std::string> v(r.begin(), r.end());
    std::sort(v.begin(), v.end(), [](const std::string& a, const std::string& b) { return natural_less(a, b); });
    return v;
}

}  // namespace

ScoreTensor parse_long_csv(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) {
            header = split_csv_line(line, line_no);
            break;
        }
    }
    if (header.empty()) throw Error(ErrorCode::ParseError, "empty CSV input");

    auto column = [&](std::string_view name, bool required) -> std::optional<std::size_t> {
        for (std::size_t c = 0; c < header.size(); ++c)
            if (header[c] == name) return c;
        if (required) throw Error(ErrorCode::ParseError, "CSV header lacks column '" + std::string(name) + "'");
        return std::nullopt;
    };
    const std::size_t c_item = *column("item_id", true);
    const std::size_t c_system = *column("system", true);
    const std::size_t c_budget = *column("budget", true);
    const std::size_t c_artifact = *column("artifact", true);
    const std::size_t c_score = *column("score", true);
    const std::optional<std::size_t> c_role = column("role", false);

    std::map<std::pair<std::string, std::string>, CellBuild> cells;
    std::unordered_set<std::string> systems, budgets, all_items;

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto f = split_csv_line(line, line_no);
        if (f.size() != header.size())
            throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + " has " + std::to_string(f.size()) +
                                                   " fields, header has " + std::to_string(header.size()));
        Role role = Role::Both;
        if (c_role) {
            const std::string& r = f[*c_role];
            if (r == "score") role = Role::Score;
            else if (r == "eval") role = Role::Eval;
            else if (!r.empty() && r != "both")
                throw Error(ErrorCode::ParseError, "unknown role '" + r + "' on line " + std::to_string(line_no));
        }
        const double value = parse_score(f[c_score], line_no);
        const std::string& item = f[c_item];
        const std::string& artifact = f[c_artifact];

        systems.insert(f[c_system]);
        budgets.insert(f[c_budget]);
        all_items.insert(item);
        CellBuild& cb = cells[{f[c_system], f[c_budget]}];
        if (cb.artifact_set.insert(artifact).second) cb.artifacts.push_back(artifact);
        cb.item_set.insert(item);
        Entry& e = cb.entries[{item, artifact}];
        const bool dup = (role != Role::Eval && e.score) || (role != Role::Score && e.eval);
        if (dup)
            throw Error(ErrorCode::DuplicateEntry, "item " + item + " artifact " + artifact + " in cell " +
                                                       f[c_system] + ":" + f[c_budget] + " given twice (line " +
                                                       std::to_string(line_no) + ")");
        if (role != Role::Eval) e.score = value;
        if (role != Role::Score) e.eval = value;
        if (role != Role::Both) cb.role_specific = true;
    }
    if (cells.empty()) throw Error(ErrorCode::ParseError, "CSV has no data rows");

    ScoreTensor t;
    t.items = naturally_sorted(all_items);
    t.budget_grid = naturally_sorted(budgets);
    std::unordered_map<std::string, std::size_t> item_pos;
    for (std::size_t i = 0; i < t.items.size(); ++i) item_pos[t.items[i]] = i;

    for (const auto& system : naturally_sorted(systems)) {
        for (const auto& budget : t.budget_grid) {
            auto it = cells.find({system, budget});
            if (it == cells.end()) continue;
            CellBuild& cb = it->second;
            const std::string label = system + ":" + budget;
            if (cb.item_set.size() != all_items.size())
                throw Error(ErrorCode::InconsistentItems, "cell " + label + " covers " +
                                                              std::to_string(cb.item_set.size()) + " of " +
                                                              std::to_string(all_items.size()) + " items");
            Cell cell;
            cell.system = system;
            cell.budget = budget;
            cell.artifacts = naturally_sorted(cb.artifacts);
            const std::size_t M = t.items.size(), K = cell.artifacts.size();
            cell.scores = ScoreMatrix(M, K);
            if (cb.role_specific) cell.eval_scores = ScoreMatrix(M, K);
            for (std::size_t k = 0; k < K; ++k) {
                for (std::size_t i = 0; i < M; ++i) {
                    auto e = cb.entries.find({t.items[i], cell.artifacts[k]});
                    const bool have = e != cb.entries.end() && e->second.score &&
                                      (!cb.role_specific || e->second.eval);
                    if (!have) {
                        std::string what = (e == cb.entries.end() || !e->second.score) ? "score" : "eval";
                        throw Error(ErrorCode::MissingCellEntry, "cell " + label + " lacks the " + what +
                                                                     " entry for item " + t.items[i] +
                                                                     " artifact " + cell.artifacts[k]);
                    }
                    cell.scores(i, k) = *e->second.score;
                    if (cb.role_specific) (*cell.eval_scores)(i, k) = *e->second.eval;
                }
            }
            t.cells.push_back(std::move(cell));
        }
    }
    require_valid(t);
    return t;
}

void write_long_csv(const ScoreTensor& t, std::ostream& out) {
    out << "item_id,system,budget,artifact,role,score\n";
    for (const auto& cell : t.cells) {
        const std::string sys = csv_field(cell.system), bud = csv_field(cell.budget);
        for (std::size_t k = 0; k < cell.shortlist_size(); ++k) {
            const std::string art = csv_field(cell.artifacts[k]);
            for (std::size_t i = 0; i < t.item_count(); ++i) {
                const std::string prefix = csv_field(t.items[i]) + "," + sys + "," + bud + "," + art + ",";
                if (cell.eval_scores) {
                    out << prefix << "score," << format_double(cell.scores(i, k)) << '\n';
                    out << prefix << "eval," << format_double((*cell.eval_scores)(i, k)) << '\n';
                } else {
                    out << prefix << "," << format_double(cell.scores(i, k)) << '\n';
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// JSON

namespace {

std::string label_of(const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer() || v.is_number_unsigned()) return v.dump();
    if (v.is_number_float()) return format_double(v.get<double>());
    throw Error(ErrorCode::ParseError, "identifier must be a string or number, got " + v.dump());
}

ScoreMatrix matrix_from_json(const nlohmann::json& rows, std::size_t M, std::size_t K, const std::string& label) {
    if (!rows.is_array()) throw Error(ErrorCode::ParseError, "cell " + label + ": scores must be an array of rows");
    if (rows.size() != M)
        throw Error(ErrorCode::InconsistentItems,
                    "cell " + label + " has " + std::to_string(rows.size()) + " rows for " + std::to_string(M) + " items");
    ScoreMatrix z(M, K);
    for (std::size_t i = 0; i < M; ++i) {
        const auto& row = rows[i];
        if (!row.is_array() || row.size() != K)
            throw Error(ErrorCode::MissingCellEntry, "cell " + label + " row " + std::to_string(i) + " does not have " +
                                                         std::to_string(K) + " entries");
        for (std::size_t k = 0; k < K; ++k) {
            if (!row[k].is_number()) throw Error(ErrorCode::ParseError, "cell " + label + ": non-numeric score");
            const double v = row[k].get<double>();
            if (!(v >= 0.0 && v <= 1.0))
                throw Error(ErrorCode::OutOfRangeScore, "cell " + label + " row " + std::to_string(i) + " score outside [0, 1]");
            z(i, k) = v;
        }
    }
    return z;
}

}  // namespace

ScoreTensor tensor_from_json(const nlohmann::json& doc) {
    try {
        ScoreTensor t;
        for (const auto& item : doc.at("items")) t.items.push_back(label_of(item));
        const std::size_t M = t.items.size();
        for (const auto& c : doc.at("cells")) {
            Cell cell;
            cell.system = label_of(c.at("system"));
            cell.budget = label_of(c.at("budget"));
            for (const auto& a : c.at("artifacts")) cell.artifacts.push_back(label_of(a));
            const std::string label = cell.ref().label();
            cell.scores = matrix_from_json(c.at("scores"), M, cell.artifacts.size(), label);
            if (c.contains("eval_scores"))
                cell.eval_scores = matrix_from_json(c.at("eval_scores"), M, cell.artifacts.size(), label);
            t.cells.push_back(std::move(cell));
        }
        if (doc.contains("budget_grid")) {
            for (const auto& b : doc.at("budget_grid")) t.budget_grid.push_back(label_of(b));
        } else {
            for (const auto& cell : t.cells)
                if (std::find(t.budget_grid.begin(), t.budget_grid.end(), cell.budget) == t.budget_grid.end())
                    t.budget_grid.push_back(cell.budget);
        }
        require_valid(t);
        return t;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, e.what());
    }
}

nlohmann::ordered_json tensor_to_json(const ScoreTensor& t) {
    nlohmann::ordered_json doc;
    doc["items"] = t.items;
    doc["budget_grid"] = t.budget_grid;
    auto rows = [&](const ScoreMatrix& z) {
        nlohmann::ordered_json out = nlohmann::ordered_json::array();
        for (std::size_t i = 0; i < z.rows(); ++i) {
            nlohmann::ordered_json row = nlohmann::ordered_json::array();
            for (std::size_t k = 0; k < z.cols(); ++k) row.push_back(z(i, k));
            out.push_back(std::move(row));
        }
        return out;
    };
    doc["cells"] = nlohmann::ordered_json::array();
    for (const auto& cell : t.cells) {
        nlohmann::ordered_json c;
        c["system"] = cell.system;
        c["budget"] = cell.budget;
        c["artifacts"] = cell.artifacts;
        c["scores"] = rows(cell.scores);
        if (cell.eval_scores) c["eval_scores"] = rows(*cell.eval_scores);
        doc["cells"].push_back(std::move(c));
    }
    return doc;
}

// ---------------------------------------------------------------------------
// Files

TensorFormat format_for(const std::filesystem::path& path) {
    auto ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext == ".json" ? TensorFormat::Json : TensorFormat::LongCsv;
}

ScoreTensor load_tensor(const std::filesystem::path& path, TensorFormat format) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    if (format == TensorFormat::LongCsv) return parse_long_csv(in);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
    }
    return tensor_from_json(doc);
}

ScoreTensor load_tensor(const std::filesystem::path& path) { return load_tensor(path, format_for(path)); }

std::string canonical_bytes(const ScoreTensor& t) {
    std::ostringstream out;
    out << "budget_grid";
    for (const auto& b : t.budget_grid) out << ',' << csv_field(b);
    out << '\n';
    write_long_csv(t, out);
    return out.str();
}

std::string fingerprint(const ScoreTensor& t) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : canonical_bytes(t)) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace siren
