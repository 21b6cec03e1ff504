#pragma once

#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "calib/error.hpp"
#include "calib/format.hpp"
#include "calib/prediction_store.hpp"

namespace calib {

enum class FileFormat { jsonl, csv };

inline FileFormat format_from_name(std::string_view name) {
    if (name == "jsonl") return FileFormat::jsonl;
    if (name == "csv") return FileFormat::csv;
    throw Error("unknown format: " + std::string(name));
}

namespace detail {

// One JSONL row is an object with exactly the keys "logits" and "label".
// Anything else is a malformed row; range and finiteness are checked by the
// caller so the error order stays arity -> finite -> gold range.
inline PredictionRecord parse_jsonl_row(const std::string& line, std::size_t row) {
    const nlohmann::json parsed = nlohmann::json::parse(line, nullptr, false);
    if (parsed.is_discarded() || !parsed.is_object() || parsed.size() != 2 ||
        !parsed.contains("logits") || !parsed.contains("label")) {
        throw ParseError("malformed row", row);
    }
    const auto& logits = parsed["logits"];
    const auto& label = parsed["label"];
    if (!logits.is_array() || !label.is_number_integer()) throw ParseError("malformed row", row);

    PredictionRecord record;
    record.logits.reserve(logits.size());
    for (const auto& entry : logits) {
        if (!entry.is_number()) throw ParseError("malformed row", row);
        record.logits.push_back(entry.get<double>());
    }
    const auto gold = label.get<std::int64_t>();
    if (gold < 0) throw ParseError("gold_label out of range", row);
    record.gold_label = static_cast<std::size_t>(gold);
    return record;
}

inline std::string csv_header(std::size_t num_classes, std::string_view value_prefix,
                              std::string_view label_column) {
    std::string header;
    for (std::size_t i = 0; i < num_classes; ++i) {
        header += std::string(value_prefix) + std::to_string(i) + ",";
    }
    header += label_column;
    return header;
}

// Header row fixes the arity: logit_0,...,logit_{K-1},label.
inline std::size_t parse_csv_header(const std::string& line) {
    const auto fields = split_csv(line);
    if (fields.size() < 3 || fields.back() != "label") throw ParseError("malformed row", 1);
    const std::size_t k = fields.size() - 1;
    for (std::size_t i = 0; i < k; ++i) {
        if (fields[i] != "logit_" + std::to_string(i)) throw ParseError("malformed row", 1);
    }
    return k;
}

inline PredictionRecord parse_csv_row(const std::string& line, std::size_t num_classes,
                                      std::size_t row) {
    const auto fields = split_csv(line);
    if (fields.size() != num_classes + 1) throw ParseError("inconsistent logit arity", row);
    PredictionRecord record;
    record.logits.reserve(num_classes);
    for (std::size_t i = 0; i < num_classes; ++i) {
        const auto value = parse_double(fields[i]);
        if (!value) throw ParseError("malformed row", row);
        record.logits.push_back(*value);
    }
    const auto gold = parse_int64(fields.back());
    if (!gold) throw ParseError("malformed row", row);
    if (*gold < 0) throw ParseError("gold_label out of range", row);
    record.gold_label = static_cast<std::size_t>(*gold);
    return record;
}

}  // namespace detail

// Streaming ingest; line numbers in errors are 1-based physical lines, so the
// CSV header occupies line 1 and data starts at line 2.
inline PredictionSet ingest(std::istream& in, FileFormat format, SplitTag tag,
                            std::optional<std::size_t> num_classes = std::nullopt) {
    std::vector<PredictionRecord> records;
    std::size_t k = num_classes.value_or(0);
    if (k != 0) check_num_classes(k);

    std::string line;
    std::size_t row = 0;
    if (format == FileFormat::csv) {
        if (!std::getline(in, line)) throw Error("empty file");
        row = 1;
        const std::size_t header_k = detail::parse_csv_header(line);
        if (k != 0 && k != header_k) throw ParseError("inconsistent logit arity", 1);
        k = header_k;
        check_num_classes(k);
    }

    while (std::getline(in, line)) {
        ++row;
        PredictionRecord record = format == FileFormat::jsonl
                                      ? detail::parse_jsonl_row(line, row)
                                      : detail::parse_csv_row(line, k, row);
        if (k == 0) {
            k = record.logits.size();
            check_num_classes(k);
        }
        validate_record(record, k, row);
        records.push_back(std::move(record));
        if (records.size() > kMaxRecords) throw Error("record count exceeds supported maximum");
    }
    if (records.empty()) throw Error("empty file");
    return PredictionSet{LabelSpace{k}, std::move(records), tag};
}

inline PredictionSet ingest(const std::string& path, FileFormat format, SplitTag tag,
                            std::optional<std::size_t> num_classes = std::nullopt) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open file: " + path);
    return ingest(in, format, tag, num_classes);
}

// Writers emit round-trip-safe numbers (17 significant digits). The split tag
// is not part of the on-disk format; callers re-tag on ingest.
inline void write(std::ostream& out, const PredictionSet& set, FileFormat format) {
    if (format == FileFormat::csv) {
        out << detail::csv_header(set.num_classes(), "logit_", "label") << "\n";
        for (const auto& record : set.records) {
            for (const double logit : record.logits) out << fmt_roundtrip(logit) << ",";
            out << record.gold_label << "\n";
        }
        return;
    }
    for (const auto& record : set.records) {
        out << "{\"logits\":[";
        for (std::size_t i = 0; i < record.logits.size(); ++i) {
            if (i > 0) out << ",";
            out << fmt_roundtrip(record.logits[i]);
        }
        out << "],\"label\":" << record.gold_label << "}\n";
    }
}

inline void write(const std::string& path, const PredictionSet& set, FileFormat format) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open file: " + path);
    write(out, set, format);
    if (!out) throw Error("write failed: " + path);
}

}  // namespace calib
