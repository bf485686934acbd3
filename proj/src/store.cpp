#include "orthoplan/store.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

namespace orthoplan {

namespace {

constexpr const char* kLogName = "patients.jsonl";

std::string now_iso8601() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::array<char, 64> buf{};
    std::snprintf(buf.data(), buf.size(), "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900, tm.tm_mon + 1,
                  tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, static_cast<int>(ms));
    return buf.data();
}

std::string frames_name(const std::string& id, int version) {
    return "frames/" + id + "-v" + std::to_string(version) + ".json";
}

long numeric_suffix(const std::string& id) {
    if (!id.starts_with("pat-")) return 0;
    try {
        return std::stol(id.substr(4));
    } catch (const std::exception&) {
        return 0;
    }
}

}  // namespace

std::string content_hash(const Json& doc) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const unsigned char c : doc.dump()) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    std::array<char, 17> buf{};
    std::snprintf(buf.data(), buf.size(), "%016llx", static_cast<unsigned long long>(h));
    return buf.data();
}

PatientStore::PatientStore(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_ / "frames", ec);
    if (ec) throw std::runtime_error("cannot create data directory " + dir_.string() + ": " + ec.message());
    std::ifstream in(dir_ / kLogName);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        Json doc = Json::parse(line, nullptr, false);
        // A torn final line from an interrupted write is skipped.
        if (doc.is_discarded() || !doc.is_object() || !doc.contains("id")) continue;
        const std::string id = doc["id"].get<std::string>();
        next_id_ = std::max(next_id_, numeric_suffix(id) + 1);
        records_[id] = std::move(doc);
    }
}

std::vector<Json> PatientStore::list() const {
    std::lock_guard lock(mutex_);
    std::vector<Json> out;
    for (const auto& [id, doc] : records_) out.push_back(doc);
    return out;
}

std::optional<Json> PatientStore::get(const std::string& id) const {
    std::lock_guard lock(mutex_);
    const auto it = records_.find(id);
    if (it == records_.end()) return std::nullopt;
    return it->second;
}

std::optional<Json> PatientStore::frames(const std::string& id) const {
    std::string ref;
    {
        std::lock_guard lock(mutex_);
        const auto it = records_.find(id);
        if (it == records_.end()) return std::nullopt;
        ref = it->second.value("frames_ref", "");
    }
    std::ifstream in(dir_ / ref, std::ios::binary);
    if (ref.empty() || !in) throw std::runtime_error("frame sequence " + ref + " is missing");
    std::ostringstream buf;
    buf << in.rdbuf();
    return Json::parse(buf.str());
}

Json PatientStore::write_locked(Json record, const Json& frames) {
    const std::string id = record["id"].get<std::string>();
    const int version = record["version"].get<int>();
    const std::string ref = frames_name(id, version);
    {
        const auto tmp = dir_ / (ref + ".tmp");
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out << frames.dump();
        out.close();
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        std::filesystem::rename(tmp, dir_ / ref);
    }
    record["frames_ref"] = ref;
    std::ofstream log(dir_ / kLogName, std::ios::binary | std::ios::app);
    log << record.dump() << '\n';
    log.flush();
    if (!log) throw std::runtime_error("cannot append to " + (dir_ / kLogName).string());
    records_[id] = record;
    return record;
}

Json PatientStore::create(Json record, const Json& frames) {
    std::lock_guard lock(mutex_);
    if (!record.contains("id")) {
        std::array<char, 32> buf{};
        std::snprintf(buf.data(), buf.size(), "pat-%06ld", next_id_++);
        record["id"] = buf.data();
    } else if (records_.contains(record["id"].get<std::string>())) {
        throw std::invalid_argument("record id already exists");
    }
    const std::string ts = now_iso8601();
    record["version"] = 1;
    record["created_at"] = ts;
    record["updated_at"] = ts;
    return write_locked(std::move(record), frames);
}

PatientStore::Update PatientStore::update(const std::string& id, int expected_version, const Json& changes,
                                          const Json& frames) {
    std::lock_guard lock(mutex_);
    const auto it = records_.find(id);
    if (it == records_.end()) return {Outcome::NotFound, Json()};
    Json current = it->second;
    if (current["version"].get<int>() != expected_version) return {Outcome::Conflict, current};
    if (changes.value("content_hash", "") == current.value("content_hash", "")) return {Outcome::Unchanged, current};
    for (const auto& [key, value] : changes.items()) current[key] = value;
    current["version"] = expected_version + 1;
    current["updated_at"] = now_iso8601();
    return {Outcome::Written, write_locked(std::move(current), frames)};
}

PatientStore::Update PatientStore::upsert(const std::string& id, Json record, const Json& frames) {
    std::lock_guard lock(mutex_);
    const auto it = records_.find(id);
    if (it == records_.end()) {
        const std::string ts = now_iso8601();
        record["id"] = id;
        record["version"] = 1;
        record["created_at"] = ts;
        record["updated_at"] = ts;
        return {Outcome::Written, write_locked(std::move(record), frames)};
    }
    Json current = it->second;
    if (record.value("content_hash", "") == current.value("content_hash", "")) return {Outcome::Unchanged, current};
    for (const auto& [key, value] : record.items()) current[key] = value;
    current["version"] = current["version"].get<int>() + 1;
    current["updated_at"] = now_iso8601();
    return {Outcome::Written, write_locked(std::move(current), frames)};
}

}  // namespace orthoplan
