#pragma once

// Embedded document store for patient records.
//
// Records live in <dir>/patients.jsonl, one JSON document per line; the last line
// for an id wins on load. Frame sequences are written to <dir>/frames/ and
// referenced from the record by "frames_ref". Every record carries an integer
// "version" (optimistic concurrency) and a "content_hash" of its arch, plan and
// crowding inputs.

#include "orthoplan/serialization.hpp"

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace orthoplan {

/// FNV-1a over the compact dump of `doc`, as 16 hex digits.
std::string content_hash(const Json& doc);

class PatientStore {
public:
    /// Creates the directory if needed and replays the log. Throws std::runtime_error
    /// when the directory cannot be used.
    explicit PatientStore(std::filesystem::path dir);

    std::vector<Json> list() const;
    std::optional<Json> get(const std::string& id) const;
    std::optional<Json> frames(const std::string& id) const;

    /// Assigns id (unless `record` has one), version 1, timestamps and frames_ref.
    Json create(Json record, const Json& frames);

    enum class Outcome { Written, Unchanged, Conflict, NotFound };
    struct Update {
        Outcome outcome;
        Json record;  // current record after the call (empty for NotFound)
    };

    /// Replaces the fields of `changes` when the stored version still equals
    /// `expected_version`. Equal content hashes leave the record untouched.
    Update update(const std::string& id, int expected_version, const Json& changes, const Json& frames);

    /// Creates or refreshes a record under a fixed id.
    Update upsert(const std::string& id, Json record, const Json& frames);

    const std::filesystem::path& directory() const { return dir_; }

private:
    Json write_locked(Json record, const Json& frames);

    std::filesystem::path dir_;
    mutable std::mutex mutex_;
    std::map<std::string, Json> records_;
    long next_id_ = 1;
};

}  // namespace orthoplan
