#include "duca/container.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "duca/digest.hpp"
#include "duca/error.hpp"

static_assert(std::endian::native == std::endian::little,
              "container I/O assumes a little-endian host");
static_assert(sizeof(float) == 4);

namespace duca {

namespace {

template <class T>
void write_pod(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <class T>
bool read_pod(std::istream& in, T& value) {
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  return static_cast<bool>(in);
}

}  // namespace

std::string container_digest(const Container& c) {
  Digester d;
  d.update(c.magic);
  d.update_u64(c.version);
  d.update_u64(c.dim);
  d.update_u64(c.count);
  d.update(c.matrix.data(), c.matrix.size() * sizeof(float));
  nlohmann::json meta = c.meta;
  meta.erase("digests");
  d.update(meta.dump());
  return d.hex();
}

void save_container(const Container& c, const std::filesystem::path& path) {
  if (c.magic.size() != 4) fail(ErrorKind::InvalidInput, "container magic must be 4 bytes");
  if (c.matrix.size() != static_cast<std::size_t>(c.count) * c.dim) {
    fail(ErrorKind::InvalidInput, "container matrix size does not match count*dim");
  }

  Container out = c;
  if (!out.meta.is_object()) out.meta = nlohmann::json::object();
  out.meta["digests"]["self"] = container_digest(c);
  const std::string meta_text = out.meta.dump();

  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) fail(ErrorKind::Io, "cannot open " + tmp.string() + " for writing");
    f.write(out.magic.data(), 4);
    write_pod<std::uint32_t>(f, out.version);
    write_pod<std::uint32_t>(f, out.dim);
    write_pod<std::uint64_t>(f, out.count);
    f.write(reinterpret_cast<const char*>(out.matrix.data()),
            static_cast<std::streamsize>(out.matrix.size() * sizeof(float)));
    write_pod<std::uint64_t>(f, meta_text.size());
    f.write(meta_text.data(), static_cast<std::streamsize>(meta_text.size()));
    if (!f) fail(ErrorKind::Io, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    fail(ErrorKind::Io, "cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

Container load_container(const std::filesystem::path& path, const std::string& expected_magic) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ErrorKind::Io, "cannot open " + path.string());

  Container c;
  char magic[4];
  f.read(magic, 4);
  if (!f) fail(ErrorKind::Format, path.string() + ": truncated header");
  c.magic.assign(magic, 4);
  if (c.magic != expected_magic) {
    fail(ErrorKind::Format, path.string() + ": bad magic \"" + c.magic + "\", expected \"" +
                                expected_magic + "\"");
  }
  if (!read_pod(f, c.version)) fail(ErrorKind::Format, path.string() + ": truncated header");
  if (c.version != 1) {
    fail(ErrorKind::Format,
         path.string() + ": unsupported version " + std::to_string(c.version) + ", expected 1");
  }
  if (!read_pod(f, c.dim) || !read_pod(f, c.count)) {
    fail(ErrorKind::Format, path.string() + ": truncated header");
  }

  const std::uint64_t cells = c.count * c.dim;
  c.matrix.resize(cells);
  f.read(reinterpret_cast<char*>(c.matrix.data()),
         static_cast<std::streamsize>(cells * sizeof(float)));
  if (!f) fail(ErrorKind::Format, path.string() + ": truncated matrix payload");

  std::uint64_t meta_len = 0;
  if (!read_pod(f, meta_len)) fail(ErrorKind::Format, path.string() + ": truncated metadata length");
  std::string meta_text(meta_len, '\0');
  f.read(meta_text.data(), static_cast<std::streamsize>(meta_len));
  if (!f) fail(ErrorKind::Format, path.string() + ": truncated metadata");

  c.meta = nlohmann::json::parse(meta_text, nullptr, false);
  if (c.meta.is_discarded()) fail(ErrorKind::Format, path.string() + ": metadata is not valid JSON");

  if (c.meta.contains("digests") && c.meta["digests"].contains("self")) {
    const std::string stored = c.meta["digests"]["self"].get<std::string>();
    if (stored != container_digest(c)) {
      fail(ErrorKind::Integrity, path.string() + ": stored digest does not match content");
    }
  }
  return c;
}

}  // namespace duca
