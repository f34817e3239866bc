#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace bkio {

/// Positional, thread-safe read access to an immutable byte sequence.
class ByteSource {
public:
    virtual ~ByteSource() = default;

    [[nodiscard]] virtual std::uint64_t size() const = 0;
    /// Fills `out` from `offset`; throws truncated if the range is past the end.
    virtual void read_at(std::uint64_t offset, std::span<std::uint8_t> out) const = 0;

    [[nodiscard]] std::vector<std::uint8_t> read_vector(std::uint64_t offset, std::size_t length) const;
};

class FileSource final : public ByteSource {
public:
    explicit FileSource(const std::filesystem::path& path);
    ~FileSource() override;

    FileSource(const FileSource&) = delete;
    FileSource& operator=(const FileSource&) = delete;

    [[nodiscard]] std::uint64_t size() const override { return size_; }
    void read_at(std::uint64_t offset, std::span<std::uint8_t> out) const override;

private:
    int fd_ = -1;
    std::uint64_t size_ = 0;
};

/// Non-owning; the viewed bytes must outlive the source.
class MemorySource final : public ByteSource {
public:
    explicit MemorySource(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    [[nodiscard]] std::uint64_t size() const override { return bytes_.size(); }
    void read_at(std::uint64_t offset, std::span<std::uint8_t> out) const override;

private:
    std::span<const std::uint8_t> bytes_;
};

/// Append-only output file.
class FileSink {
public:
    explicit FileSink(const std::filesystem::path& path);
    ~FileSink();

    FileSink(FileSink&& other) noexcept;
    FileSink& operator=(FileSink&& other) noexcept;
    FileSink(const FileSink&) = delete;
    FileSink& operator=(const FileSink&) = delete;

    void write(std::span<const std::uint8_t> bytes);
    void close();

    [[nodiscard]] std::uint64_t position() const noexcept { return position_; }
    [[nodiscard]] bool is_open() const noexcept { return fd_ >= 0; }

private:
    int fd_ = -1;
    std::uint64_t position_ = 0;
};

} // namespace bkio
