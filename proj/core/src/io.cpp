#include <bkio/io.hpp>

#include <cerrno>
#include <cstring>
#include <string>
#include <utility>

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <bkio/error.hpp>

namespace bkio {

namespace {

[[noreturn]] void throw_errno(const std::string& what)
{
    throw Error(ErrorCode::io_failure, what + ": " + std::strerror(errno));
}

void check_range(std::uint64_t offset, std::size_t length, std::uint64_t size)
{
    if (offset > size || length > size - offset) {
        throw Error(ErrorCode::truncated, "read of " + std::to_string(length) + " bytes at offset "
                                              + std::to_string(offset) + " exceeds source size "
                                              + std::to_string(size));
    }
}

} // namespace

std::vector<std::uint8_t> ByteSource::read_vector(std::uint64_t offset, std::size_t length) const
{
    std::vector<std::uint8_t> out(length);
    read_at(offset, out);
    return out;
}

FileSource::FileSource(const std::filesystem::path& path)
{
    fd_ = ::open(path.c_str(), O_RDONLY | O_CLOEXEC);
    if (fd_ < 0) {
        throw_errno("cannot open '" + path.string() + "'");
    }
    struct stat st {};
    if (::fstat(fd_, &st) != 0) {
        const int saved = errno;
        ::close(fd_);
        errno = saved;
        throw_errno("cannot stat '" + path.string() + "'");
    }
    size_ = static_cast<std::uint64_t>(st.st_size);
}

FileSource::~FileSource()
{
    if (fd_ >= 0) {
        ::close(fd_);
    }
}

void FileSource::read_at(std::uint64_t offset, std::span<std::uint8_t> out) const
{
    check_range(offset, out.size(), size_);
    std::size_t done = 0;
    while (done < out.size()) {
        const auto n = ::pread(fd_, out.data() + done, out.size() - done, static_cast<off_t>(offset + done));
        if (n < 0) {
            if (errno == EINTR) {
                continue;
            }
            throw_errno("pread");
        }
        if (n == 0) {
            throw Error(ErrorCode::truncated, "unexpected end of file");
        }
        done += static_cast<std::size_t>(n);
    }
}

void MemorySource::read_at(std::uint64_t offset, std::span<std::uint8_t> out) const
{
    check_range(offset, out.size(), bytes_.size());
    std::memcpy(out.data(), bytes_.data() + offset, out.size());
}

FileSink::FileSink(const std::filesystem::path& path)
{
    fd_ = ::open(path.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
    if (fd_ < 0) {
        throw_errno("cannot create '" + path.string() + "'");
    }
}

FileSink::~FileSink()
{
    if (fd_ >= 0) {
        ::close(fd_);
    }
}

FileSink::FileSink(FileSink&& other) noexcept
    : fd_(std::exchange(other.fd_, -1)), position_(other.position_)
{}

FileSink& FileSink::operator=(FileSink&& other) noexcept
{
    if (this != &other) {
        if (fd_ >= 0) {
            ::close(fd_);
        }
        fd_ = std::exchange(other.fd_, -1);
        position_ = other.position_;
    }
    return *this;
}

void FileSink::write(std::span<const std::uint8_t> bytes)
{
    if (fd_ < 0) {
        throw Error(ErrorCode::io_failure, "write to closed file");
    }
    std::size_t done = 0;
    while (done < bytes.size()) {
        const auto n = ::write(fd_, bytes.data() + done, bytes.size() - done);
        if (n < 0) {
            if (errno == EINTR) {
                continue;
            }
            throw_errno("write");
        }
        done += static_cast<std::size_t>(n);
    }
    position_ += bytes.size();
}

void FileSink::close()
{
    if (fd_ < 0) {
        return;
    }
    const int fd = std::exchange(fd_, -1);
    if (::close(fd) != 0) {
        throw_errno("close");
    }
}

} // namespace bkio
