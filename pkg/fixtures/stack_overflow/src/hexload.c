/*
 * hexload: decode a hex-encoded key and print a one-byte digest.
 *
 * Keys arrive as hex text (whitespace ignored); the decoded form is
 * folded into a xor digest so two dumps of the same key can be
 * compared at a glance.
 */

#include <stdio.h>

static int hexval(int c)
{
	if (c >= '0' && c <= '9') {
		return c - '0';
	}
	if (c >= 'a' && c <= 'f') {
		return c - 'a' + 10;
	}
	if (c >= 'A' && c <= 'F') {
		return c - 'A' + 10;
	}
	return -1;
}

static int decode_key(const char* hex, int n)
{
	unsigned char raw[16];
	int digest;
	int i;
	int k;

	k = 0;
	for (i = 0; i + 1 < n; i += 2) {
		if (hexval(hex[i]) < 0 || hexval(hex[i + 1]) < 0) {
			return -1;
		}
		raw[k++] = (unsigned char)((hexval(hex[i]) << 4)
		                           | hexval(hex[i + 1]));
	}
	digest = 0;
	for (i = 0; i < k; i++) {
		digest ^= raw[i];
	}
	return digest;
}

int main(int argc, char** argv)
{
	FILE* fp;
	char hex[512];
	int n;
	int c;
	int digest;

	if (argc != 2) {
		fprintf(stderr, "usage: hexload <key-file>\n");
		return 2;
	}
	fp = fopen(argv[1], "r");
	if (!fp) {
		perror(argv[1]);
		return 2;
	}
	n = 0;
	while ((c = fgetc(fp)) != EOF && n < (int)sizeof(hex)) {
		if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
			continue;
		}
		hex[n++] = (char)c;
	}
	fclose(fp);
	digest = decode_key(hex, n);
	if (digest < 0) {
		fprintf(stderr, "hexload: not a hex key\n");
		return 1;
	}
	printf("digest %02x\n", digest);
	return 0;
}
