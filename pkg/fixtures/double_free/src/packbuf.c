/*
 * packbuf: verify checksummed records.
 *
 * Each input line is one record, "<sum>:<payload>", where <sum> is the
 * decimal byte sum of the payload truncated to 16 bits. Records that
 * fail the check are skipped; the run always reports how many records
 * passed.
 */

#include <stdio.h>
#include <stdlib.h>
#include <string.h>

static unsigned byte_sum(const unsigned char* data, int n)
{
	unsigned sum;
	int i;

	sum = 0;
	for (i = 0; i < n; i++) {
		sum += data[i];
	}
	return sum & 0xffffu;
}

static int check_record(const char* line)
{
	unsigned char* payload;
	const char* colon;
	unsigned expected;
	int n;
	int ok;

	colon = strchr(line, ':');
	if (!colon) {
		fprintf(stderr, "packbuf: record has no checksum\n");
		return 0;
	}
	expected = (unsigned)strtoul(line, 0, 10) & 0xffffu;
	n = (int)strlen(colon + 1);
	payload = malloc(n > 0 ? n : 1);
	if (!payload) {
		return 0;
	}
	memcpy(payload, colon + 1, n);
	ok = 0;
	if (byte_sum(payload, n) != expected) {
		fprintf(stderr, "packbuf: bad checksum, record skipped\n");
		free(payload);
		goto done;
	}
	printf("record ok (%d bytes)\n", n);
	ok = 1;
done:
	free(payload);
	return ok;
}

int main(int argc, char** argv)
{
	FILE* fp;
	char line[512];
	size_t len;
	int good;

	if (argc != 2) {
		fprintf(stderr, "usage: packbuf <records-file>\n");
		return 2;
	}
	fp = fopen(argv[1], "r");
	if (!fp) {
		perror(argv[1]);
		return 2;
	}
	good = 0;
	while (fgets(line, sizeof(line), fp)) {
		len = strlen(line);
		if (len > 0 && line[len - 1] == '\n') {
			line[len - 1] = '\0';
		}
		if (line[0] != '\0') {
			good += check_record(line);
		}
	}
	fclose(fp);
	printf("%d record(s) ok\n", good);
	return 0;
}
