#pragma once

#include <algorithm>
#include <cctype>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "escalator/errors.hpp"

namespace escalator {

enum class TaskKind { convergent, open_ended };

inline std::string to_string(TaskKind k) {
    return k == TaskKind::convergent ? "convergent" : "open_ended";
}

inline TaskKind task_kind_from_string(const std::string& s) {
    if (s == "convergent") return TaskKind::convergent;
    if (s == "open_ended") return TaskKind::open_ended;
    throw SchemaMismatch("unknown task_kind: " + s);
}

struct Query {
    std::string id;
    std::string prompt;
    TaskKind task_kind = TaskKind::convergent;
    std::optional<std::string> gold_answer;
};

// One Layer-1 model's reply to a query.
struct ModelOutput {
    std::string model_id;
    std::string raw_text;
    std::optional<std::string> extracted_answer;
    std::optional<double> confidence;  // in [0,1] when present
    long long output_tokens = 0;
    double latency = 0.0;  // seconds
};

struct EnsembleResponse {
    std::string query_id;
    std::vector<ModelOutput> outputs;  // nonempty
};

// The answer Layer 1 would return on short-circuit, with its ensemble support.
struct AggregatedAnswer {
    std::string answer;
    double support = 0.0;  // in (0,1]
    std::string source_model;
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

inline std::string to_lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

// Canonical decimal form: no thousands separators, no leading '+', no
// trailing ".0"-style fractional zeros. Returns absent when the input is not
// a plain decimal number.
inline std::optional<std::string> normalize_numeric(const std::string& raw) {
    std::string s;
    s.reserve(raw.size());
    for (char c : raw) {
        if (c == ',' || std::isspace(static_cast<unsigned char>(c))) continue;
        s.push_back(c);
    }
    if (!s.empty() && s.front() == '+') s.erase(s.begin());
    if (s.empty()) return std::nullopt;

    std::size_t i = s.front() == '-' ? 1 : 0;
    if (i == s.size()) return std::nullopt;
    bool seen_dot = false;
    bool seen_digit = false;
    for (std::size_t k = i; k < s.size(); ++k) {
        if (s[k] == '.') {
            if (seen_dot) return std::nullopt;
            seen_dot = true;
        } else if (std::isdigit(static_cast<unsigned char>(s[k]))) {
            seen_digit = true;
        } else {
            return std::nullopt;
        }
    }
    if (!seen_digit) return std::nullopt;

    if (seen_dot) {
        while (!s.empty() && s.back() == '0') s.pop_back();
        if (!s.empty() && s.back() == '.') s.pop_back();
    }
    // Strip redundant leading zeros ("007" -> "7", "0.5" stays).
    std::size_t sign = s.front() == '-' ? 1 : 0;
    std::size_t z = sign;
    while (z + 1 < s.size() && s[z] == '0' && s[z + 1] != '.') ++z;
    s.erase(sign, z - sign);
    if (s == "-0" || s == "-") s = "0";
    if (s.empty()) return std::nullopt;
    return s;
}

// Strip sentence punctuation that commonly clings to a numeric token.
inline std::string strip_token_punct(std::string t) {
    const std::string lead = "($\"'";
    const std::string trail = ".,;:!?)\"'%";
    std::size_t b = 0;
    while (b < t.size() && lead.find(t[b]) != std::string::npos) ++b;
    std::size_t e = t.size();
    while (e > b && trail.find(t[e - 1]) != std::string::npos) --e;
    return t.substr(b, e - b);
}

inline std::string collapse_whitespace(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    bool in_space = false;
    for (char c : s) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            in_space = true;
            continue;
        }
        if (in_space && !out.empty()) out.push_back(' ');
        in_space = false;
        out.push_back(c);
    }
    return out;
}

}  // namespace detail

// Pull the canonical answer out of a raw completion. Convergent tasks use the
// final "####" marker when present, otherwise the last numeric token; absence
// is a value, not an error.
inline std::optional<std::string> extract_answer(const std::string& raw_text, TaskKind task_kind) {
    if (task_kind == TaskKind::open_ended) {
        std::string flat = detail::collapse_whitespace(raw_text);
        if (flat.empty()) return std::nullopt;
        return flat;
    }

    const std::string marker = "####";
    std::size_t pos = raw_text.rfind(marker);
    if (pos != std::string::npos) {
        std::string rest = raw_text.substr(pos + marker.size());
        std::size_t nl = rest.find('\n');
        if (nl != std::string::npos) rest = rest.substr(0, nl);
        return detail::normalize_numeric(detail::strip_token_punct(detail::trim(rest)));
    }

    // No marker: scan whitespace tokens from the end for the last numeric one.
    std::istringstream iss(raw_text);
    std::string tok;
    std::optional<std::string> last;
    while (iss >> tok) {
        auto norm = detail::normalize_numeric(detail::strip_token_punct(tok));
        if (norm) last = norm;
    }
    return last;
}

// Last line matching `Confidence: <number>%` (case-insensitive), as a
// fraction clamped to [0,1].
inline std::optional<double> parse_confidence(const std::string& raw_text) {
    std::optional<double> result;
    std::istringstream iss(raw_text);
    std::string line;
    while (std::getline(iss, line)) {
        std::string low = detail::to_lower(line);
        std::size_t pos = low.find("confidence:");
        if (pos == std::string::npos) continue;
        std::string rest = detail::trim(line.substr(pos + std::string("confidence:").size()));
        // Accept "90%", "90 %", "90.5%".
        std::size_t end = 0;
        while (end < rest.size() &&
               (std::isdigit(static_cast<unsigned char>(rest[end])) || rest[end] == '.' ||
                rest[end] == '+' || rest[end] == '-')) {
            ++end;
        }
        if (end == 0) continue;
        std::string num = rest.substr(0, end);
        std::string after = detail::trim(rest.substr(end));
        if (after.empty() || after.front() != '%') continue;
        try {
            double pct = std::stod(num);
            double frac = pct / 100.0;
            result = std::clamp(frac, 0.0, 1.0);
        } catch (const std::exception&) {
            continue;
        }
    }
    return result;
}

namespace detail {

inline double confidence_or_default(const ModelOutput& o) {
    return o.confidence.value_or(0.5);
}

}  // namespace detail

// Lowercased whitespace tokens as a sorted, deduplicated set.
inline std::vector<std::string> token_set(const std::string& text) {
    std::istringstream iss(detail::to_lower(text));
    std::vector<std::string> toks;
    std::string t;
    while (iss >> t) toks.push_back(t);
    std::sort(toks.begin(), toks.end());
    toks.erase(std::unique(toks.begin(), toks.end()), toks.end());
    return toks;
}

// Jaccard similarity of the two texts' token sets. Two empty texts count as
// identical; one empty text against a nonempty one scores 0.
inline double lexical_similarity(const std::string& a, const std::string& b) {
    std::vector<std::string> sa = token_set(a);
    std::vector<std::string> sb = token_set(b);
    if (sa.empty() && sb.empty()) return 1.0;
    if (sa.empty() || sb.empty()) return 0.0;
    std::size_t inter = 0;
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < sa.size() && j < sb.size()) {
        int cmp = sa[i].compare(sb[j]);
        if (cmp == 0) {
            ++inter;
            ++i;
            ++j;
        } else if (cmp < 0) {
            ++i;
        } else {
            ++j;
        }
    }
    std::size_t uni = sa.size() + sb.size() - inter;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

// The answer Layer 1 returns on short-circuit. Convergent: majority vote over
// extracted answers, support = modal count / answers present, ties broken by
// highest confidence then ensemble order. Open-ended: highest-confidence
// output, support = mean lexical similarity of the chosen text to the whole
// ensemble (self included).
inline AggregatedAnswer aggregate_l1_answer(const EnsembleResponse& ensemble, TaskKind task_kind) {
    const auto& outs = ensemble.outputs;
    if (outs.empty()) throw NoAnswerAvailable("ensemble has no outputs");

    if (task_kind == TaskKind::convergent) {
        // Votes in first-seen order so index-based tie-breaks are stable.
        std::vector<std::string> answers;
        std::vector<int> counts;
        std::vector<double> best_conf;
        std::vector<std::size_t> first_idx;
        std::vector<std::size_t> rep_idx;
        std::size_t n_with_answer = 0;
        for (std::size_t i = 0; i < outs.size(); ++i) {
            if (!outs[i].extracted_answer) continue;
            ++n_with_answer;
            const std::string& a = *outs[i].extracted_answer;
            double conf = detail::confidence_or_default(outs[i]);
            auto it = std::find(answers.begin(), answers.end(), a);
            if (it == answers.end()) {
                answers.push_back(a);
                counts.push_back(1);
                best_conf.push_back(conf);
                first_idx.push_back(i);
                rep_idx.push_back(i);
            } else {
                std::size_t k = static_cast<std::size_t>(it - answers.begin());
                counts[k] += 1;
                if (conf > best_conf[k]) {
                    best_conf[k] = conf;
                    rep_idx[k] = i;
                }
            }
        }
        if (n_with_answer == 0) throw NoAnswerAvailable("no output yields an extracted answer");

        std::size_t winner = 0;
        for (std::size_t k = 1; k < answers.size(); ++k) {
            if (counts[k] > counts[winner] ||
                (counts[k] == counts[winner] && best_conf[k] > best_conf[winner])) {
                winner = k;
            }
            // Remaining ties keep the earlier answer (ensemble order).
        }
        AggregatedAnswer agg;
        agg.answer = answers[winner];
        agg.support = static_cast<double>(counts[winner]) / static_cast<double>(n_with_answer);
        agg.source_model = outs[rep_idx[winner]].model_id;
        return agg;
    }

    // Open-ended: pick the most confident nonempty output.
    std::size_t chosen = outs.size();
    double chosen_conf = -1.0;
    for (std::size_t i = 0; i < outs.size(); ++i) {
        if (detail::trim(outs[i].raw_text).empty()) continue;
        double conf = detail::confidence_or_default(outs[i]);
        if (conf > chosen_conf) {
            chosen_conf = conf;
            chosen = i;
        }
    }
    if (chosen == outs.size()) throw NoAnswerAvailable("no output has nonempty text");

    AggregatedAnswer agg;
    agg.answer = detail::collapse_whitespace(outs[chosen].raw_text);
    agg.source_model = outs[chosen].model_id;
    double sim_sum = 0.0;
    for (const auto& o : outs) sim_sum += lexical_similarity(outs[chosen].raw_text, o.raw_text);
    agg.support = sim_sum / static_cast<double>(outs.size());
    return agg;
}

}  // namespace escalator
